"""
Running every scenario from Python
==================================

The command line ``qoptml reproduce --figure k`` is a thin layer over
:class:`ScenarioConfig` and :func:`run`. Here we run each scenario at its
default size, write the CSV files and list the built-in checks.
"""

import sys
from pathlib import Path

from qoptml.experiments import SCENARIOS, ScenarioConfig, run

out = Path(sys.argv[1] if len(sys.argv) > 1 else "qoptml-out")
for name in SCENARIOS:
    cfg = ScenarioConfig(name, out_dir=str(out))
    report = run(cfg)
    path = report.write()
    verdict = ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in report.checks.items())
    print(f"{name:15s} {report.wall_clock_s:6.1f} s  {path}  [{verdict}]")

# A custom configuration: overrides use the same key = value syntax as config files
cfg = ScenarioConfig.from_text("scenario = fig3\nn_samples = 20000\n", overrides=["replicas=50"], out_dir=str(out))
print(cfg.to_text())
print(run(cfg).summary)
