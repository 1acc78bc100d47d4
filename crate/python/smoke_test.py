#!/usr/bin/env python3
"""Smoke test for the mrgc_py extension module.

Builds the cdylib with the extension-module feature, copies it next to a
temporary directory as an importable module, and exercises the main bindings
against hand-computed values.

Usage: python3 python/smoke_test.py
"""

import math
import random
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_module(tmp: Path) -> None:
    subprocess.run(
        ["cargo", "build", "-p", "mrgc-py", "--features", "extension-module"],
        cwd=REPO,
        check=True,
    )
    built = REPO / "target" / "debug" / "libmrgc_py.so"
    if not built.exists():  # macOS
        built = REPO / "target" / "debug" / "libmrgc_py.dylib"
    shutil.copy(built, tmp / "mrgc_py.so")


def main() -> int:
    with tempfile.TemporaryDirectory() as tmpdir:
        tmp = Path(tmpdir)
        build_module(tmp)
        sys.path.insert(0, str(tmp))
        import mrgc_py

        # graph construction and representation: P3, Z = A(AX) by hand
        g = mrgc_py.Graph([[1.0, 0.0], [0.0, 1.0], [2.0, 0.0]], [(0, 1), (1, 2)], [0, 1, 0])
        assert g.num_nodes == 3 and g.num_edges == 2
        assert g.representation() == [[3.0, 0.0], [0.0, 2.0], [3.0, 0.0]]

        # JSON round trip
        path = tmp / "g.json"
        g.save_json(str(path))
        g2 = mrgc_py.Graph.load(str(path))
        assert g2.features == g.features and g2.edges == g.edges

        # Ollivier-Ricci hand values
        single = mrgc_py.Graph([[0.0], [1.0]], [(0, 1)], [0, 0])
        assert abs(mrgc_py.ricci_edge(single, 0, 1) - 1.0) < 1e-12
        triangle = mrgc_py.Graph([[0.0]] * 3, [(0, 1), (1, 2), (0, 2)], [0] * 3)
        assert abs(mrgc_py.ricci_edge(triangle, 0, 1) - 0.75) < 1e-12
        assert abs(mrgc_py.ricci_node(triangle, 0) - 0.75) < 1e-12

        # dimension regularizer: sqrt(1.5) * exp(-1/2) for the two-point cloud
        expected = math.sqrt(1.5) * math.exp(-0.5)
        assert abs(mrgc_py.loss_dim([[0.0], [1.0]]) - expected) < 1e-12

        # complexity hand values
        assert abs(mrgc_py.fdr([[0.0], [2.0], [4.0], [6.0]], [0, 0, 1, 1]) - 0.2) < 1e-12
        assert abs(mrgc_py.fhc([[0.0], [0.0], [10.0]], [0, 0, 1]) - 2 / 3) < 1e-12

        # intrinsic dimension of a 1-D cloud is close to 1
        rng = random.Random(7)
        line = [[t, 2.0 * t, -t] for t in (rng.random() for _ in range(300))]
        d = mrgc_py.mle_id(line)
        assert 0.7 < d < 1.3, d

        # attacks are deterministic in the seed and respect budgets
        big = mrgc_py.Graph(
            [[float(i), 0.0] for i in range(10)],
            [(i, i + 1) for i in range(9)],
            [i % 2 for i in range(10)],
        )
        a1, t1 = mrgc_py.feature_attack(big, 30.0, 42)
        a2, t2 = mrgc_py.feature_attack(big, 30.0, 42)
        assert t1 == t2 and len(t1) == 3 and a1.features == a2.features
        _, flipped = mrgc_py.label_attack(big, 40.0, 7)
        assert len(flipped) == 4

        # a tiny unregularized condensation run decreases the backbone loss
        result = mrgc_py.condense_graph(
            big, ratio=0.3, epochs=20, lr=0.05, alpha=0.0, beta=0.0, gamma=0.0
        )
        assert not result.diverged
        totals = [h[4] for h in result.history]
        assert totals[-1] < totals[0], totals
        assert mrgc_py.loss_gc(big, result.features, result.labels) <= totals[0]

        print("smoke test passed:", mrgc_py.__version__)
        return 0


if __name__ == "__main__":
    sys.exit(main())
