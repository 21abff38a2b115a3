"""Smoke tests for the backlab Python module against the built extension."""

import math
import sys

import backlab as bl


def check(condition, message):
    if not condition:
        print(f"FAIL: {message}")
        sys.exit(1)
    print(f"ok: {message}")


def main():
    eb = bl.BackoffSpec.exponential(2.0, w0=16)
    pb = bl.BackoffSpec.polynomial(3.0, w0=16)

    check(bl.growth_factor(eb, 3) == 8.0, "growth_factor EB(2) k=3")
    analytic, integer = bl.window(eb, 3)
    check(analytic == 128.0 and integer == 128, "window EB(2) k=3")

    gamma, oscillating = bl.gamma_limit(eb)
    check(gamma == 2.0 and not oscillating, "gamma_limit EB(2)")

    sol = bl.solve(eb, 10)
    check(sol.converged, "solve converges")
    check(abs(sol.pc - (1 - (1 - sol.tau) ** 9)) < 1e-8, "fixed-point residual")

    sim = bl.simulate(eb, 10, slots=100_000, seed=7)
    check(
        sim.successes + sim.collisions + sim.idle_slots == 100_000,
        "slot conservation",
    )
    check(abs(sim.pc_overall - sol.pc) < 0.03, "simulator tracks the fixed point")

    region, alpha = bl.classify_tail(eb, 0.25)
    check(region == "power-law" and abs(alpha - 2.0) < 1e-12, "EB tail class")
    region, alpha = bl.classify_tail(pb, 0.25)
    check(region == "heavy-non-power-law" and alpha is None, "PB(3) tail class")

    p, truncation_mass, underresolved = bl.lambda_pmf(pb, 0.0, 64)
    check(abs(sum(p) + truncation_mass - 1.0) < 1e-9, "pmf normalization")
    check(all(abs(v - 1 / 16) < 1e-12 for v in p[:16]), "pc=0 pmf is uniform")

    mean, variance = bl.countdown_moments(eb, 0.25)
    check(abs(mean - (16 - 2 / 3)) < 1e-9, "countdown mean closed form")
    check(variance is None, "countdown variance divergent at pc r^2 = 1")

    check(
        abs(bl.lerch_phi(0.5, -2.0, 0.0) - 6.0) < 1e-9,
        "lerch_phi(0.5, -2, 0) = 6",
    )

    limit, stable, s_inf = bl.asymptotic_pc(eb)
    check(
        limit == 0.5 and stable and abs(s_inf - math.log(2) / 2) < 1e-12,
        "EB asymptotics",
    )

    jain, starved, mean_count = bl.fairness([100, 100, 100, 100])
    check(jain == 1.0 and starved == 0.0 and mean_count == 100.0, "fairness")

    delays = sim.delay_samples_us
    check(len(delays) == sim.successes, "one delay sample per success")
    _, suspected = bl.variance_growth(delays)
    check(isinstance(suspected, bool), "variance growth diagnosis")

    try:
        bl.BackoffSpec.exponential(0.9)
        check(False, "invalid spec must raise")
    except ValueError:
        check(True, "invalid spec raises ValueError")

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
