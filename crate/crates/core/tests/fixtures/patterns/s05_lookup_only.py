import pandas as pd

# simple lookup of the item master, no aggregation
items = pd.read_excel("masters/ITEM_MASTER.xlsx", sheet_name="items")
items = items.rename(columns=str.upper)
columns = ["ITEM_CODE", "DESCRIPTION", "UOM", "CATEGORY"]
wanted = items[items["CATEGORY"].isin(["SPARES", "CONSUMABLES"])]
print(wanted[columns].head(25).to_string(index=False))
print("rows shown:", min(len(wanted), 25))
