"""Smoke test for the qndanneal Python module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/qndanneal-*.whl
"""

import math

import qndanneal as q


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    # meter in |0> with coupling x0 stretches time by (1 + x0)
    x0, t = 2.0, 3.0
    problem = q.IsingProblem.random(3, seed=4)
    slow = q.run_anneal(q.AnnealSetup.ising(problem, (1 + x0) * t), steps=1500)
    qnd = q.run_anneal(q.AnnealSetup.ising(problem, t).with_meter(x0, state="zero"), steps=1500)
    close(qnd.fidelity, slow.fidelity, 1e-10)
    print(f"rescaling: F_qnd={qnd.fidelity:.12f} F_coh((1+x0)T)={slow.fidelity:.12f}")

    # Kraus operators of a |+> meter are complete
    setup = q.AnnealSetup.landau_zener(1.0, 8.0).with_meter(1.0, state="plus")
    ks = q.kraus_operators(setup, setup.window[1], steps=800)
    dim = setup.system_dim
    for i in range(dim):
        for j in range(dim):
            s = sum(k[r][i].conjugate() * k[r][j] for k in ks for r in range(dim))
            close(abs(s - (1.0 if i == j else 0.0)), 0.0, 1e-10)
    print(f"kraus: {len(ks)} operators, complete")

    # slow Landau-Zener sweep follows the closed form
    v = 0.5
    r = q.run_anneal(q.AnnealSetup.landau_zener_rate(v, 1.0), steps=20000)
    expected = q.lz_infidelity(v, 1.0)
    close((1 - r.fidelity) / expected, 1.0, 0.05)
    print(f"landau-zener: 1-F={1 - r.fidelity:.6f} closed form={expected:.6f}")

    # dephasing lowers the averaged coherence
    times = [-5.0 + 0.1 * k for k in range(101)]
    plus = [1 / math.sqrt(2), 1 / math.sqrt(2)]
    base = q.AnnealSetup.landau_zener(1.0, 10.0)
    coh = q.coherence_trace(base, plus, times, steps=2000)
    meas = q.coherence_trace(base.with_meter(2.0, state="plus"), plus, times, steps=2000)
    assert sum(meas) < sum(coh)
    print(f"coherence: mean {sum(meas) / len(meas):.4f} with meter, {sum(coh) / len(coh):.4f} without")

    # gadget keeps the ground manifold for a positive coefficient
    g = q.IsingProblem([[0.0] * 3 for _ in range(3)], [0.0] * 3, three_body=[([0, 1, 2], 1.0)])
    report = g.gadget_report()
    assert report["manifold_ok"], report
    print(f"gadget: ground states {report['original_ground']} -> {report['decomposed_ground']}")

    # uncoupled protocol has TTS ratio 1
    sweep = q.tts_ratio_sweep([2], instances=2, mode="none", steps=300)
    close(sweep["sizes"][0]["mean_ratio"], 1.0, 1e-12)
    print("tts: uncoupled ratio 1")
    print("smoke test passed")


if __name__ == "__main__":
    main()
