"""Median / 90th percentile tables and decay fits for sweep CSVs."""

import argparse
import csv
import math

from sdquant import analysis


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("csv", nargs="+")
    args = p.parse_args()
    for path in args.csv:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            print(f"{path}: empty")
            continue
        is_cs = "support_recovered" in rows[0]
        group = (lambda r: float(r["lambda"])) if is_cs else (lambda r: (int(r["r"]), float(r["lambda"])))
        ok = [r for r in rows if r.get("support_recovered", "true") == "true"]
        stats = analysis.error_summary(ok, group, lambda r: float(r["error_l2"]))
        print(f"== {path}")
        if is_cs:
            rate = analysis.group_rate(rows, group, lambda r: r["support_recovered"] == "true")
            stage1 = analysis.group_quantile(rows, group, lambda r: float(r["coarse_error_l2"]))
            for lam, s in stats.items():
                print(f"lambda={lam:g}: recovery {rate[lam]:.3f}  stage-one median {stage1[lam]:.3e}"
                      f"  stage-two median {s['median']:.3e}  p90 {s['p90']:.3e}")
            lams = list(stats)
            fit = analysis.loglog_slope(lams, [stats[l]["median"] for l in lams])
            print(f"log-log slope {fit.slope:.3f} (R2 {fit.r2:.3f})")
            continue
        by_lam = {}
        for (r, lam), s in stats.items():
            print(f"r={r} lambda={lam:g}: median {s['median']:.3e}  p90 {s['p90']:.3e}")
            by_lam.setdefault(r, {})[lam] = s["median"]
        orders = sorted(by_lam)
        if len(orders) > 1 and all(len(by_lam[r]) > 1 for r in orders):
            for r in orders:
                lams = sorted(by_lam[r])
                fit = analysis.loglog_slope(lams, [by_lam[r][l] for l in lams])
                print(f"r={r}: log-log slope {fit.slope:.3f} (R2 {fit.r2:.3f})")
        else:
            # one order per lambda: compare sqrt(lambda) and log(lambda) models
            med = {lam: m for r in orders for lam, m in by_lam[r].items()}
            lams = sorted(med)
            errs = [med[l] for l in lams]
            if len(lams) > 1 and all(e > 0 and math.isfinite(e) for e in errs):
                root = analysis.root_exponential_fit(lams, errs)
                poly = analysis.loglog_slope(lams, errs)
                print(f"log error vs sqrt(lambda): slope {root.slope:.3f} R2 {root.r2:.4f}")
                print(f"log error vs log(lambda):  slope {poly.slope:.3f} R2 {poly.r2:.4f}")


if __name__ == "__main__":
    main()
