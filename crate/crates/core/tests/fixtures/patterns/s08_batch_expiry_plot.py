import pandas as pd
import plotly.express as px

batches = pd.read_csv("BATCH_DETAILS.csv", parse_dates=["EXPIRY_DATE"])
bins = pd.read_csv("WAREHOUSE_BINS.csv")

batches = batches.merge(bins, on=["BIN_ID", "ORGANIZATION"], how="left")
soon = batches[(batches["EXPIRY_DATE"] - pd.Timestamp("2024-06-30")).dt.days <= 60]

fig = px.scatter(soon, x="EXPIRY_DATE", y="QUANTITY", color="ZONE", hover_data=["BATCH_ID"])
fig.write_html("expiring_batches.html")
print("batches expiring within 60 days:", soon.shape[0])
