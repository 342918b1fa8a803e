"""Compare closed-form and Monte Carlo error constants on the random walk.

Prints, for each N, the predicted Q/eps (simple maps) and Q/eps^2 (symmetrized
maps) from exact moments, from Taylor-moment estimates, and the measured value.
"""

import argparse

import numpy as np

from implicit_samplers import draw_ensemble, estimate_q, log_weights, predict_q, randomwalk_target
from implicit_samplers.asymptotics import estimate_taylor_moments, randomwalk_exact_moments
from implicit_samplers.problems import RandomWalkProblem
from implicit_samplers.target import ModeInfo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 5, 20])
    ap.add_argument("--eps", type=float, default=1e-5)
    ap.add_argument("--n-samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'N':>4} {'method':>6} {'exact':>12} {'moments':>12} {'measured':>12} {'+-':>10}")
    for n_dim in args.dims:
        t = randomwalk_target(RandomWalkProblem(n_dim, epsilon=args.eps))
        z = np.zeros(n_dim)
        m = ModeInfo.from_hessian(z, 0.0, t.hessian(z))
        exact = randomwalk_exact_moments(n_dim)
        est = estimate_taylor_moments(t, m, args.n_samples, args.seed + 1)
        for method in ("lm", "rm", "slm", "srm"):
            power = 1 if method in ("lm", "rm") else 2
            scale = args.eps**power
            rep = estimate_q(log_weights(draw_ensemble(method, t, m, args.n_samples, args.seed)))
            print(
                f"{n_dim:>4} {method:>6} {predict_q(method, n_dim, 1.0, exact):>12.5g} "
                f"{predict_q(method, n_dim, 1.0, est) / scale:>12.5g} "
                f"{rep.q_hat / scale:>12.5g} {rep.q_se / scale:>10.3g}"
            )


if __name__ == "__main__":
    main()
