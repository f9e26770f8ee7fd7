"""Builds the extension module and runs a small pipeline through it.

Usage: python3 python/smoke_test.py [--release]
"""

import importlib.util
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build(release):
    cmd = ["cargo", "build", "-p", "tabkip-python"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=ROOT, check=True)
    profile = "release" if release else "debug"
    lib = ROOT / "target" / profile / "libtabkip.so"
    if not lib.exists():
        lib = lib.with_suffix(".dylib")
    return lib


def load(lib, into):
    dest = pathlib.Path(into) / "tabkip.so"
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("tabkip", dest)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    lib = build("--release" in sys.argv)
    with tempfile.TemporaryDirectory() as tmp:
        tk = load(lib, tmp)

        ds = tk.Dataset.synthetic(n=600, d=4, ir=5.0, separation=2.0, seed=1).standardize()
        assert ds.n_rows == 600 and ds.n_features == 4
        assert abs(ds.imbalance_ratio() - 5.0) < 1e-9, ds.imbalance_ratio()
        train, test = ds.split(test_fraction=0.25, seed=1)
        print(ds, train, test)

        coreset, losses = tk.distill(train, 20, objective="asig", epochs=10, seed=1)
        assert len(coreset) == 20 and len(coreset.x[0]) == 4
        assert len(losses) > 0 and all(l == l for l in losses)
        print(coreset, f"first loss {losses[0]:.4f} last loss {losses[-1]:.4f}")

        full = tk.evaluate(train, test, classifier="krr")
        small = tk.evaluate(coreset, test, classifier="krr")
        forest = tk.evaluate(coreset, test, classifier="forest", seed=3)
        assert 0.5 < small.auc <= 1.0
        print("full", full)
        print("coreset", small)
        print("coreset forest", forest)

        assert tk.auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

        rows = tk.projection(ds, [("asig", coreset)])
        assert len(rows) == 600 + 20
        assert rows[-1][0] == "asig"

        csv = tk.sweep(train, test, ["ce", "focal"], [10], classifiers=["krr", "knn"], epochs=3)
        lines = csv.strip().splitlines()
        # full + random + two objectives, each with two classifiers
        assert len(lines) == 1 + 8, len(lines)
        print(lines[0])

        alpha, beta, val_auc = tk.calibrate_g(train, [0.0, 1.0], [0.0], seed=2)
        print(f"calibrated alpha_g={alpha} beta_g={beta} auc={val_auc:.4f}")

        try:
            tk.distill(train, 1)
        except ValueError as e:
            print("rejected m=1:", e)
        else:
            raise AssertionError("m=1 should be rejected")

        path = pathlib.Path(tmp) / "data.csv"
        ds.write_csv(str(path))
        again = tk.Dataset.from_csv(str(path))
        assert again.n_rows == 600 and again.labels == ds.labels
    print("python smoke test passed")


if __name__ == "__main__":
    main()
