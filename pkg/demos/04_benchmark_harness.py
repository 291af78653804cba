"""Run a scaled-down version of the repeated-experiment benchmark.

Five seeded repetitions of a low-dimensional scenario, all four method
variants (Newton/ADMM x adaptive/plain lasso), aggregated into the fixed
CSV report format.  The full-size presets (table1, table2, fig1, fig2,
wage) run the same machinery via the CLI, e.g.:

    semilasso bench --scenario table1 --out table1.csv
"""

import numpy as np

from semilasso import ScenarioSpec, emit_report, run_experiment
from semilasso.bench import render_report

scenario = ScenarioSpec(kind="lowdim_uniform", n=300, p=80, seed=2025, nnz=10,
                        value_interval=(0.5, 10.0), coef_seed=3)

table, records = run_experiment(
    scenario, ("ssnal_a", "ssnal_l", "admm_a", "admm_l"), reps=5, criterion="bic",
)

print(render_report(table, "csv"))

print("per-repetition detail (adaptive Newton):")
for rec in records:
    if rec.method != "ssnal_a":
        continue
    sup = np.flatnonzero(rec.beta_hat)
    exact = set(sup) == set(np.flatnonzero(rec.beta_star))
    print(f"  rep {rec.rep}: lambda_raw={rec.lam_raw:.4f} h={rec.bandwidth:.3f} "
          f"outer={rec.metrics.iters} support_exact={exact}")

emit_report(table, "csv", "mini_benchmark.csv")
print("\nwrote mini_benchmark.csv")
