import pandas as pd
import seaborn as sns

log = pd.read_csv("CONSUMPTION_LOG.csv", parse_dates=["ISSUE_DATE"])
log["MONTH"] = log["ISSUE_DATE"].dt.to_period("M").astype(str)

monthly = log.groupby(["MONTH", "ORGANIZATION"])["ISSUED_QTY"].sum().reset_index()
monthly = monthly.pivot(index="MONTH", columns="ORGANIZATION", values="ISSUED_QTY").fillna(0)

print(monthly.tail(12).to_string())
sns.lineplot(data=monthly)
