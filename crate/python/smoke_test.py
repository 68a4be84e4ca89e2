"""Smoke test for the pypsatz extension module.

Build and install first:  pip install --no-build-isolation ./crates/pypsatz
"""
import json
import pathlib

import pypsatz

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def main():
    assert pypsatz.normalize("(x1 + 1)^2", ["x1"]) == "x1^2 + 2*x1 + 1"
    assert abs(pypsatz.ball_bound("1 - x1^2 - x2^2", ["x1", "x2"], 1.0) - 2 * 3 ** 0.5) < 1e-12
    assert pypsatz.check_rip([[0, 1], [1, 2]])
    assert not pypsatz.check_rip([[0, 1], [2, 3], [1, 2], [0, 3]])

    rows = pypsatz.template_sizes("split", 4, 2, 8, [2, 2, 2])
    assert [r[1] for r in rows] == [7850, 6122, 2718]
    assert [r[2] for r in rows] == [1990, 1470, 796]

    ex3 = pypsatz.Problem.from_file(str(DATA / "example3.json"))
    cert, reports = pypsatz.certify(ex3)
    assert cert is not None and cert.is_exact and cert.degree == 2, reports
    assert pypsatz.verify(ex3, cert)["ok"]

    ex4 = pypsatz.Problem.from_file(str(DATA / "example4.json"))
    assert ex4.cliques == [[1, 2], [2, 3]]
    golden = pypsatz.Certificate.from_json(ex4, (DATA / "example4_certificate.json").read_text())
    rep = pypsatz.verify(ex4, golden, mode="exact")
    assert rep["ok"] and rep["residual"] == "0", rep

    doc = json.loads(golden.to_json())
    doc["slots"][3]["poly"] = "4"
    broken = pypsatz.Certificate.from_json(ex4, json.dumps(doc))
    assert not pypsatz.verify(ex4, broken)["residual_ok"]

    try:
        pypsatz.Problem.from_json("{}")
    except ValueError:
        pass
    else:
        raise AssertionError("empty problem accepted")
    print("pypsatz smoke test passed")


if __name__ == "__main__":
    main()
