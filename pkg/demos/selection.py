"""
Choosing lambda by cross-validation and by GIC
==============================================

Runs 10-fold CV (with and without the one-SE rule) and the BIC-type GIC on
the same scad path and prints the chosen model size for each.
"""

import numpy as np

from ncvpath import PenaltySpec, ProblemConfig
from ncvpath.datagen import SimSpec, generate
from ncvpath.select import cv_select, gic_select

data = generate(SimSpec(300, 40, rho=0.3, seed=7))
pen = PenaltySpec("scad", 1.0, 3.7)
cfg = ProblemConfig(n_lambda=50)

cv = cv_select(pen, data, cfg, jobs=2)
cv1 = cv_select(pen, data, cfg, jobs=2, one_se=True)
for name, sel in (("cv", cv), ("cv one-se", cv1)):
    k = sel.selected_index
    print(f"{name:9s} lambda {sel.selected_lambda:.4f} df {int(sel.path.df[k]):2d} "
          f"score {sel.scores[k]:.4f} +- {sel.score_se[k]:.4f}")

for policy in ("aic", "bic", "gic"):
    sel = gic_select(pen, data, cfg, policy=policy, path=cv.path)
    print(f"gic:{policy:5s} lambda {sel.selected_lambda:.4f} df {int(np.count_nonzero(sel.selected_beta)):2d}")
print("true coefficients 1/j, all nonzero:", int(np.count_nonzero(SimSpec(300, 40).true_beta())))
