#!/usr/bin/env python3
"""Smoke test for the stdmap_py extension module.

Builds are plain cargo (no maturin needed): the cdylib is renamed onto the
import path. Run from the repository root:

    cargo build --release -p stdmap-python
    python3 python/smoke_test.py
"""

import ctypes.util
import pathlib
import shutil
import sys
import tempfile


def import_extension():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libstdmap_py.so", "stdmap_py.so", "libstdmap_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "extension not built; run `cargo build --release -p stdmap-python` first"
        )
    stage = pathlib.Path(tempfile.mkdtemp(prefix="stdmap-py-"))
    shutil.copy2(built, stage / "stdmap_py.so")
    sys.path.insert(0, str(stage))
    import stdmap_py

    return stdmap_py


def approx(a, b, rel):
    assert abs(a / b - 1.0) < rel, f"{a} !~ {b} (rel {abs(a / b - 1.0):.2e})"


def main():
    m = import_extension()

    golden = m.RotationNumber("[(1)]")
    assert golden.bracket() == "[(1)]"
    assert not golden.is_rational()
    approx(golden.bryuno(), 1.2598289, 1e-6)
    assert golden.convergents(5) == [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]

    near_zero = m.RotationNumber("[500,(1)]")
    approx(near_zero.bryuno(), 6.21836, 1e-5)

    # superscript alias accepted
    alias = m.RotationNumber("[2,10,1^inf]")
    assert alias.bracket() == "[2,10,(1)]"

    # fixed point: R = eps/4 exactly
    r = m.residue(0, 1, "0.5")
    approx(r.residue, 0.125, 1e-12)
    assert r.digits == 38

    # published critical orbit residue (approximant 3/4 of sqrt(3)-1)
    r = m.residue(3, 4, "0.876067426")
    approx(r.residue, 0.24871, 1e-2)

    # classification brackets the golden critical value
    assert m.classify(golden, "0.90", k_max=12) == "subcritical"
    assert m.classify(golden, "1.20", k_max=12) == "supercritical"

    # heuristic radius matches the published table row
    approx(float(m.rho1(m.RotationNumber("[2,10,(1)]"))), 0.51409, 1e-4)

    # Lindstedt first order: u1 = -sin(alpha)/(4 sin^2(pi omega))
    coeffs = m.lindstedt_coefficients(golden, 4)
    k1 = [c for c in coeffs if c[0] == 1]
    assert len(k1) == 1 and k1[0][1] == 1

    # family instantiation
    fam = m.family("[n,(1)]", [500, 700])
    assert [f.bracket() for f in fam] == ["[500,(1)]", "[700,(1)]"]

    # scaling fit on published near-zero data recovers beta close to 1
    pairs = [
        ("[500,(1)]", "0.016585"),
        ("[700,(1)]", "0.0121005"),
        ("[1000,(1)]", "0.0086401"),
        ("[2000,(1)]", "0.0044599"),
        ("[4000,(1)]", "0.0022854"),
        ("[7000,(1)]", "0.0013265"),
        ("[10000,(1)]", "0.00093627"),
        ("[12000,(1)]", "0.00078320"),
        ("[15000,(1)]", "0.00062927"),
        ("[18000,(1)]", "0.00052610"),
        ("[20000,(1)]", "0.00047433"),
        ("[25000,(1)]", "0.00038081"),
        ("[30000,(1)]", "0.00031816"),
        ("[40000,(1)]", "0.00023955"),
        ("[50000,(1)]", "0.000192161"),
        ("[60000,(1)]", "0.000160443"),
    ]
    params, msd = m.scaling_fit(pairs)
    beta = dict(params)["beta"]
    approx(beta, 1.00359, 1e-2)
    assert msd < 0.001

    print("smoke test passed")


if __name__ == "__main__":
    main()
