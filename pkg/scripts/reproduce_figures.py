"""Regenerate the CSV data behind each figure of the oscillator study.

    python scripts/reproduce_figures.py            # everything (several minutes)
    python scripts/reproduce_figures.py --quick    # skip the 10^7-step RK4 reference

Each manifest in configs/ is run through ``nsfd run``; the phase-plane
sweep (several initial states, NSFD at dt = 1.0 and 0.001) is generated
here directly.  Output goes to results/.
"""
import argparse
import math
import sys
from pathlib import Path

from nsfd.harness import ExperimentConfig, cmd_run

ROOT = Path(__file__).resolve().parents[1]


def phase_plane_configs(radius=1.0, count=8):
    for dt, stride in ((1.0, 1), (0.001, 100)):
        for j in range(count):
            a = 2 * math.pi * j / count
            y0 = [round(radius * math.cos(a), 12), round(radius * math.sin(a), 12)]
            yield ExperimentConfig(method="nsfd", weight="lyapunov", margin=0.001, dt=dt, final_time=1000.0,
                                   y0=y0, stride=stride, out=str(ROOT / f"results/fig89_phase_dt{dt:g}_ic{j}.csv"))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="skip the RK4 reference and the dt=0.001 sweeps")
    args = parser.parse_args()
    status = 0
    for path in sorted((ROOT / "configs").glob("*.json")):
        cfg = ExperimentConfig.load(path)
        if args.quick and cfg.dt < 0.01:
            continue
        cfg.out = str(ROOT / cfg.out)
        print(f"{path.name}: ", end="", flush=True)
        status |= cmd_run(cfg)
    for cfg in phase_plane_configs():
        if args.quick and cfg.dt < 0.01:
            continue
        print(f"{Path(cfg.out).name}: ", end="", flush=True)
        status |= cmd_run(cfg)
    return status


if __name__ == "__main__":
    sys.exit(main())
