# Regenerates dataset1.csv and dataset2.csv with numpy's legacy MT19937
# stream (seed 101), standardizing with population moments.
import numpy as np
import pandas as pd

np.random.seed(101)
n = 1000
X1 = np.random.uniform(size=n)
X2 = np.random.uniform(size=n)

X1_scaled = (X1 - np.mean(X1)) / np.std(X1)
X2_scaled = (X2 - np.mean(X2)) / np.std(X2)

df1 = pd.DataFrame({"X1": X1_scaled, "X2": X2_scaled})
df1["Y"] = df1["X1"] - df1["X2"]

X2_adjusted = 0.5 * X1_scaled + np.sqrt(1 - 0.5**2) * X2_scaled
df2 = pd.DataFrame({"X1": X1_scaled, "X2": X2_adjusted})
df2["Y"] = df2["X1"] - df2["X2"]

df1.to_csv("dataset1.csv", index=False, float_format="%.17g")
df2.to_csv("dataset2.csv", index=False, float_format="%.17g")
