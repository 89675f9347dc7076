import pandas as pd

orders = pd.read_csv("PURCHASE_ORDERS.csv", parse_dates=["ORDER_DATE"])
lines = pd.read_csv("PO_LINES.csv")
suppliers = pd.read_csv("SUPPLIER_MASTER.csv")

# bring line detail and supplier names together
df = pd.merge(orders, lines, on="PO_NUMBER")
df = pd.merge(df, suppliers, on=["SUPPLIER_ID"])

open_lines = df.query("LINE_STATUS == 'OPEN'")
counts = open_lines.groupby("SUPPLIER_NAME").size().rename("OPEN_LINES")
counts = counts.sort_values(ascending=False).head(10)
for name, n in counts.items():
    print(f"{name:40s} {n:6d}")
