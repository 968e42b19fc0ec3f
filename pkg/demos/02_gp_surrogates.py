"""Gaussian-process building blocks: regression and classification.

Fits the exact-marginal-likelihood regressor to a noisy 1-D function,
compares posterior predictions against the truth, and fits the Laplace
classifier to thresholded labels of the same function.
"""

import numpy as np

from orderedbo import fit_classifier, fit_regressor

rng = np.random.default_rng(3)


def truth(x):
    return np.sin(3.0 * x) + 0.5 * x


X = rng.uniform(0.0, 2.0, size=(25, 1))
y = truth(X[:, 0]) + 0.05 * rng.standard_normal(25)

reg = fit_regressor(X, y)
print("regressor hyperparameters after ML-II:")
print(f"  lengthscales {reg.lengthscales}")
print(f"  signal var   {reg.signal_var:.4f}")
print(f"  noise var    {reg.noise_var:.6f}")

Xq = np.linspace(0.0, 2.0, 9)[:, None]
mean, cov = reg.predict(Xq)
sd = np.sqrt(np.diag(cov))
print("\n   x     truth    mean      sd")
for xv, t, m, s in zip(Xq[:, 0], truth(Xq[:, 0]), mean, sd):
    print(f"  {xv:4.2f}  {t:7.3f}  {m:7.3f}  {s:6.3f}")

worst = np.max(np.abs(mean - truth(Xq[:, 0])))
print(f"\nlargest |mean - truth| on the grid: {worst:.4f}")

# Same inputs, binary view: does the function exceed zero?
labels = (y > 0.0).astype(float)
clf = fit_classifier(X, labels)
proba = clf.predict_proba(Xq)
print("\nclassifier P(label = 1) along the grid:")
for xv, p in zip(Xq[:, 0], proba):
    marker = "+" if truth(xv) > 0 else "-"
    print(f"  {xv:4.2f}  {p:5.3f}  truth {marker}")
