import pandas as pd
import matplotlib.pyplot as plt

aging = pd.read_parquet("warehouse/STOCK_AGING.parquet")
items = pd.read_parquet("warehouse/ITEM_MASTER.parquet")

aging = aging.merge(items, left_on="ITEM", right_on="ITEM_CODE", how="inner")
old = aging[aging["AGE_DAYS"] > 90]

by_slab = old.groupby("AGING_SLAB")["QUANTITY"].sum().reset_index()
by_slab = by_slab.sort_values("QUANTITY", ascending=False)

fig, ax = plt.subplots(figsize=(8, 4))
ax.bar(by_slab["AGING_SLAB"], by_slab["QUANTITY"])
ax.set_title("Quantity older than 90 days by aging slab")
plt.tight_layout()
plt.savefig("aging.png")
