import pandas as pd

receipts = pd.read_csv("GOODS_RECEIPTS.csv", parse_dates=["RECEIPT_DATE"])
# receipts.merge(other, on="IGNORED")  -- commented out, must not count
recent = receipts[receipts["RECEIPT_DATE"] >= "2024-01-01"]
daily = recent.groupby(recent["RECEIPT_DATE"].dt.date)["RECEIVED_QTY"].sum()
print("mean received per day:", round(daily.mean(), 2))
print("days with receipts:", daily.count())
