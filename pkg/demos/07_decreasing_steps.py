"""Probing the last-iterate rate of the subgradient method with steps
1/(L u_{t+1}).

The Huber start point is chosen so that the gap equals L R^2 / (2 u_n)
exactly; random instances are checked against the same quantity. u_n grows
like 2 sqrt(n), so the bound decays like 1/(4 sqrt(n)).
"""

from qgplus.harness.studies import conjecture_probe


def main():
    report = conjecture_probe(ns=(5, 10, 20, 50, 100), battery_size=50)
    print(f"{'n':>5} {'Huber':>10} {'battery worst':>14} {'bound':>10} {'1/(4 sqrt n)':>13}")
    for r in report["rows"]:
        print(f"{r['n']:>5} {r['huber']:>10.6f} {r['battery_worst']:>14.6f} "
              f"{r['conjectured_bound']:>10.6f} {r['asymptote']:>13.6f}")
    print("violations on the battery:", len(report["violations"]))


if __name__ == "__main__":
    main()
