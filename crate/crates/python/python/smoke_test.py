"""Smoke test for the pacf2 extension module. Run after `maturin develop`."""

import json

import pacf2
from pacf2 import BitMatrix, BitVector, FeatureMap


def main():
    a = BitVector([True, False, True])
    b = BitVector.parse("3:3")
    assert str(a) == "3:5"
    assert pacf2.inner_product(a, b) is True
    assert (a ^ a).is_zero()
    assert BitVector.from_hex(5, "1a").bits() == [False, True, False, True, True]

    m = BitMatrix(3, [BitVector.parse("3:1"), BitVector.parse("3:2")])
    out = pacf2.solve_f2(m, BitVector.parse("2:3"))
    assert out.consistent and out.rank == 2 and out.solution_count == 2
    assert out.particular == BitVector.parse("3:3")
    assert set(map(str, pacf2.brute_force_solutions(m, BitVector.parse("2:3")))) == {"3:3", "3:7"}

    p = pacf2.paper_params(10, 0.1, 0.2)
    assert p.m == 99 and p.mu == 0.2 / 198
    r = pacf2.reduction_params(5, 0.2, 0.1)
    assert (r.eps_learn, r.delta_learn, r.eps_eval, r.delta_eval) == (0.02, 0.5, 0.02, 0.02)

    f = FeatureMap.identity(8)
    secret = BitVector.from_int(8, 0xA5)
    param, err = pacf2.learn_once(f, secret, 0.25, 0.1, seed=7)
    assert param == secret and err == 0.0

    g = FeatureMap.modexp_inverse(11, 2)
    assert g(BitVector.from_int(4, 8)) == BitVector.from_int(4, 3)

    rows = pacf2.verify_lemma1(4, [7], ["uniform", "point"], 10_000, 1)
    assert rows[0][5] == 0.5 and not rows[0][6]
    assert rows[1][3] == 0

    text, passed = pacf2.run_experiment(
        'mode = "two-party"\nn = 8\nepsilon = 0.25\ndelta = 0.1\ntrials = 20\nmaster_seed = 1\n'
    )
    report = json.loads(text)
    assert report["schema"] == "pacf2-report-v1" and report["kind"] == "campaign"
    assert passed == report["summary"]["passed"]
    print("pacf2 smoke test ok:", p, f"success {report['summary']['success_fraction']}")


if __name__ == "__main__":
    main()
