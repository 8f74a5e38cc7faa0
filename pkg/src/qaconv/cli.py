"""Command-line entry point: ``qaconv <command> [options]``.

Exit codes: 0 success, 1 input error, 2 capacity error.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import convolution as conv
from . import datasets, imageio, overlap, qacl, training
from .encoding import encode
from .errors import CapacityError, QaconvError

log = logging.getLogger("qaconv")

# window/kernel pair of the shot-convergence experiment (unnormalized)
VERIFY_WINDOW = np.array([[1.0, 1.0], [-5.0, 3.0]])
VERIFY_KERNEL = np.array([[5.0, 3.0], [1.0, 1.0]])
VERIFY_EXACT = 1.0 / 6.0
DEFAULT_SHOTS_LIST = (10, 100, 1000, 10000)

METHODS = ("classical", "hadamard", "swap", "adjoint", "qpe")


class InputError(QaconvError):
    pass


def _shots(text: str):
    if text == "exact":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shots must be an integer or 'exact', got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("shots must be >= 1")
    return n


def _int_list(text: str):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def resolve_image(arg: str | None) -> np.ndarray:
    """A file path, or the name of a bundled image (default ``gradient``)."""
    if arg is None:
        return datasets.bundled_image("gradient")
    if arg in datasets.IMAGES and not Path(arg).exists():
        return datasets.bundled_image(arg)
    return imageio.load_image(arg)


def resolve_kernels(arg: str | None) -> dict[str, np.ndarray]:
    """Comma-separated built-in names and/or matrix files; ``all`` for every built-in."""
    if arg is None:
        arg = "box_blur"
    if arg == "all":
        return {name: conv.builtin_kernel(name) for name in conv.KERNELS}
    out = {}
    for item in arg.split(","):
        if Path(item).exists():
            out[Path(item).stem] = imageio.load_image(item)
        else:
            try:
                out[item] = conv.builtin_kernel(item)
            except KeyError as exc:
                raise InputError(str(exc.args[0])) from None
    return out


def resolve_methods(arg: str) -> list[str]:
    if arg == "all":
        return list(METHODS)
    methods = arg.split(",")
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}; choose from {METHODS}")
    return methods


def _emit(out_prefix, suffix: str, grid=None, text: str | None = None) -> None:
    if out_prefix is None:
        return
    path = Path(f"{out_prefix}{suffix}")
    path.parent.mkdir(parents=True, exist_ok=True)
    if text is not None:
        path.write_text(text)
    else:
        imageio.save_map(grid, path)
    log.info("wrote %s", path)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def verify_rows(shots_list, seed: int, p0_values=None):
    """Rows of the shot-convergence report for the fixed 2x2 pair.

    Each row is ``(label, shots, p0_hat, overlap_hat, std_error, rel_error)``.
    """
    w, k = encode(VERIFY_WINDOW), encode(VERIFY_KERNEL)
    rows = []
    exact = overlap.hadamard_overlap(w, k)
    rows.append(("exact", 0, exact.p0, exact.overlap, 0.0, overlap.relative_error(exact.p0, VERIFY_EXACT)))
    for i, shots in enumerate(shots_list):
        est = overlap.hadamard_overlap(w, k, shots=shots, seed=seed + i)
        rows.append(
            ("sampled", shots, est.p0, est.overlap, est.std_error, overlap.relative_error(est.p0, VERIFY_EXACT))
        )
    for p0 in p0_values or ():
        rows.append(("given", 0, p0, 2 * p0 - 1, 0.0, overlap.relative_error(p0, VERIFY_EXACT)))
    return rows


def cmd_verify_qaco(args) -> int:
    shots_list = args.shots_list if args.shots is None else [args.shots]
    rows = verify_rows(shots_list, args.seed, args.p0_values)
    print(f"{'source':<8} {'shots':>6} {'p0':>10} {'overlap':>10} {'error':>9}")
    for label, shots, p0, ov, _, err in rows:
        print(f"{label:<8} {shots or '-':>6} {p0:>10.5f} {ov:>10.5f} {100 * err:>8.2f}%")
    _emit(
        args.out,
        "_verify_qaco.csv",
        text=_rows_csv(["source", "shots", "p0", "overlap", "std_error", "rel_error"], rows),
    )
    return 0


def feature_map(image, kernel, method, stride, padding, shots, seed, s):
    """ConvResult in classical units plus the raw overlap grid (None for classical)."""
    if method == "classical":
        return conv.classical_conv(image, kernel, stride, padding), None
    if method == "qpe":
        fm = qacl.qacl_layer(image, kernel, stride, padding, s=s, shots=shots, seed=seed)
    else:
        fm = qacl.overlap_map(image, kernel, method, stride, padding, shots=shots, seed=seed)
    return conv.rescale_map(fm), fm


def cmd_conv_map(args) -> int:
    image = resolve_image(args.image)
    kernels = resolve_kernels(args.kernel)
    methods = resolve_methods(args.method)
    for kname, kernel in kernels.items():
        for stride in args.stride:
            for method in methods:
                rescaled, fm = feature_map(
                    image, kernel, method, stride, args.padding, args.shots, args.seed, args.qpe_bits
                )
                tag = f"_{method}_{kname}_s{stride}"
                grid = rescaled.grid if fm is None else fm.grid
                print(f"{method:>9} {kname:<15} stride={stride} shape={grid.shape[0]}x{grid.shape[1]}")
                _emit(args.out, tag + ".csv", grid)
                _emit(args.out, tag + ".pgm", grid)
                if fm is not None:
                    _emit(args.out, tag + "_rescaled.csv", rescaled.grid)
    return 0


def cmd_qpe_layer(args) -> int:
    image = resolve_image(args.image)
    kernels = resolve_kernels(args.kernel)
    for kname, kernel in kernels.items():
        for stride in args.stride:
            fm = qacl.qacl_layer(
                image, kernel, stride, args.padding, s=args.qpe_bits, shots=args.shots, seed=args.seed
            )
            exact = qacl.overlap_map(image, kernel, "hadamard", stride, args.padding)
            classical = conv.classical_conv(image, kernel, stride, args.padding).grid
            rescaled = conv.rescale_map(fm).grid
            err = np.abs(fm.grid - exact.grid)
            rows = []
            for (j, k), value in np.ndenumerate(fm.grid):
                rows.append(
                    (str(j), str(k), value, exact.grid[j, k], err[j, k],
                     fm.norm_factors[j, k] * fm.kernel_norm, rescaled[j, k], classical[j, k])
                )
            tag = f"_qpe_{kname}_s{stride}"
            print(
                f"qpe {kname:<15} stride={stride} s={args.qpe_bits} "
                f"max|decoded-exact|={err.max():.3g} bound={np.pi / 2 ** (args.qpe_bits - 1):.3g}"
            )
            _emit(args.out, tag + ".csv", fm.grid)
            _emit(args.out, tag + ".pgm", fm.grid)
            _emit(args.out, tag + "_rescaled.csv", rescaled)
            _emit(
                args.out,
                tag + "_errors.csv",
                text=_rows_csv(
                    ["row", "col", "decoded", "exact", "abs_error", "norm_product", "rescaled", "classical"],
                    rows,
                ),
            )
    return 0


def cmd_grad_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kernel is None:
        kernel = rng.normal(size=(3, 3))
    else:
        kernel = next(iter(resolve_kernels(args.kernel).values()))
    window = rng.normal(size=kernel.shape) if args.window is None else resolve_image(args.window)
    report = training.grad_check(kernel, window, args.epsilon)
    print(f"overlap = {report.value:.12f}")
    print(f"max |analytic - finite difference| = {report.max_abs_deviation:.3e}")
    rows = [
        (str(i), a, f, abs(a - f)) for i, (a, f) in enumerate(zip(report.analytic, report.finite_difference))
    ]
    _emit(args.out, "_grad_check.csv", text=_rows_csv(["index", "analytic", "finite_difference", "abs_dev"], rows))
    return 0


def cmd_train_toy(args) -> int:
    images, labels = datasets.bright_side_dataset(args.n_per_class, seed=args.seed)
    trace, _ = training.train_toy(images, labels, lr=args.lr, iterations=args.iterations, seed=args.seed)
    for it, loss, acc in trace[:-1 : max(1, len(trace) // 10)]:
        print(f"iter {it:>5}  loss {loss:.6f}  acc {acc:.3f}")
    it, loss, acc = trace[-1]
    print(f"final  {it:>5}  loss {loss:.6f}  acc {acc:.3f}")
    _emit(args.out, "_train_toy.csv", text=_rows_csv(["iteration", "loss", "accuracy"],
                                                      [(str(i), l, a) for i, l, a in trace]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--image", help="PGM/CSV path or bundled image name (gradient, checkerboard, disk)")
    common.add_argument("--kernel", help="built-in kernel name(s), matrix file(s), or 'all'")
    common.add_argument("--stride", type=_int_list, default=[1], help="stride, or comma list (default 1)")
    common.add_argument("--padding", type=int, default=0)
    common.add_argument("--method", default="hadamard", help=f"one of {METHODS}, comma list, or 'all'")
    common.add_argument("--shots", type=_shots, default=None, help="shot count or 'exact' (default)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--qpe-bits", type=int, default=qacl.DEFAULT_QPE_BITS)
    common.add_argument("--out", help="output path prefix; nothing is written without it")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qaconv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-qaco", parents=[common], help="shot convergence of the Hadamard-test overlap")
    p.add_argument("--shots-list", type=_int_list, default=list(DEFAULT_SHOTS_LIST))
    p.add_argument("--p0-values", type=_float_list, default=None,
                   help="also report the error metric at these measured P(0) values")
    p.set_defaults(func=cmd_verify_qaco)

    p = sub.add_parser("conv-map", parents=[common], help="feature maps for fixed kernels")
    p.set_defaults(func=cmd_conv_map)

    p = sub.add_parser("qpe-layer", parents=[common], help="phase-estimation layer with per-window errors")
    p.set_defaults(func=cmd_qpe_layer)

    p = sub.add_parser("grad-check", parents=[common], help="analytic vs finite-difference kernel gradient")
    p.add_argument("--window", help="window matrix file (default: random, seeded)")
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.set_defaults(func=cmd_grad_check)

    p = sub.add_parser("train-toy", parents=[common], help="train a kernel on the bright-side toy set")
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--n-per-class", type=int, default=10)
    p.set_defaults(func=cmd_train_toy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "qpe-layer":
        args.method = "qpe"
    if args.method == "qpe" and not 1 <= args.qpe_bits <= 10:
        print(f"error: --qpe-bits must be in 1..10, got {args.qpe_bits}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 2
    except (QaconvError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
