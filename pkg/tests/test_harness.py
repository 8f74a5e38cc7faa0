import math

import numpy as np
import pytest

from qaconv import cli, datasets, imageio
from qaconv.errors import DegeneratePatchError, ParseError
from qaconv.training import grad_check, overlap_gradient, train_toy


# ---- image I/O -----------------------------------------------------------

def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 1000, size=(5, 7))
    path = tmp_path / "img.pgm"
    imageio.save_pgm(pixels, path, maxval=1000)
    assert np.array_equal(imageio.load_image(path), pixels)


def test_pgm_comments_and_layout(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_text("P2\n# a comment\n3 2 # width height\n255\n0 1 2\n3 4\n5\n")
    assert np.array_equal(imageio.load_image(path), [[0, 1, 2], [3, 4, 5]])


@pytest.mark.parametrize(
    "text,line",
    [
        ("P5\n1 1\n255\n0\n", 1),
        ("P2\n2 2\n255\n0 1\n2\n", 5),
        ("P2\n2 x\n255\n0 1 2 3\n", 2),
        ("P2\n1 1\n70000\n0\n", 3),
        ("P2\n2 1\n10\n3 11\n", 4),
    ],
)
def test_pgm_parse_errors_carry_line(tmp_path, text, line):
    path = tmp_path / "bad.pgm"
    path.write_text(text)
    with pytest.raises(ParseError) as info:
        imageio.load_image(path)
    assert info.value.line == line
    assert f"bad.pgm:{line}" in str(info.value)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    grid = rng.normal(size=(4, 6)) * 1e3
    path = tmp_path / "m.csv"
    imageio.save_map(grid, path)
    assert np.allclose(imageio.load_image(path), grid, rtol=0, atol=1e-12)
    assert np.array_equal(imageio.load_image(path), grid)


def test_csv_shape(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("1,2,3\n4,5,6\n")
    assert imageio.load_image(path).shape == (2, 3)


def test_csv_ragged_row(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("1,2,3\n4,5\n")
    with pytest.raises(ParseError) as info:
        imageio.load_image(path)
    assert info.value.line == 2


def test_render_gray():
    assert np.array_equal(imageio.render_gray([[0.0, 0.5], [1.0, 0.25]]), [[0, 128], [255, 64]])
    assert np.all(imageio.render_gray(np.full((2, 2), 3.0)) == 128)


def test_missing_file():
    with pytest.raises(ParseError):
        imageio.load_image("/nonexistent/image.pgm")


# ---- gradients and training ---------------------------------------------

def test_grad_check_random_3x3():
    rng = np.random.default_rng(2)
    report = grad_check(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
    assert report.analytic.shape == (9,) and report.finite_difference.shape == (9,)
    assert report.max_abs_deviation <= 1e-6


def test_gradient_zero_at_parallel_kernel():
    window = np.arange(1.0, 10.0).reshape(3, 3)
    g, grad = overlap_gradient(window, 3 * window)
    assert g == pytest.approx(1)
    assert np.allclose(grad, 0, atol=1e-15)


def test_gradient_homogeneity():
    rng = np.random.default_rng(3)
    a, w = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    g1, d1 = overlap_gradient(a, w)
    g2, d2 = overlap_gradient(a, 4 * w)
    assert g2 == pytest.approx(g1)
    assert np.allclose(d2, d1 / 4)


def test_gradient_zero_kernel():
    with pytest.raises(DegeneratePatchError):
        grad_check(np.zeros((2, 2)), np.ones((2, 2)))


def test_train_toy_decreases_and_separates():
    images, labels = datasets.bright_side_dataset()
    trace, _ = train_toy(images, labels)
    losses = [loss for _, loss, _ in trace]
    assert all(b < a for a, b in zip(losses[:50], losses[1:51]))
    assert trace[-1][2] == 1.0


def test_train_toy_zero_lr_constant():
    images, labels = datasets.bright_side_dataset(4)
    trace, _ = train_toy(images, labels, lr=0.0, iterations=20)
    assert len({loss for _, loss, _ in trace}) == 1


def test_train_toy_duplicated_dataset():
    images, labels = datasets.bright_side_dataset(5)
    a, _ = train_toy(images, labels, iterations=30)
    b, _ = train_toy(np.concatenate([images, images]), np.concatenate([labels, labels]), iterations=30)
    assert np.allclose(np.array(a), np.array(b), rtol=0, atol=1e-12)


def test_train_toy_deterministic_and_empty():
    images, labels = datasets.bright_side_dataset(3)
    assert train_toy(images, labels, iterations=5)[0] == train_toy(images, labels, iterations=5)[0]
    with pytest.raises(ValueError):
        train_toy(np.zeros((0, 6, 6)), np.zeros(0))


# ---- CLI ------------------------------------------------------------------

def run(args, capsys):
    code = cli.main(args)
    return code, capsys.readouterr()


def test_verify_qaco_exact_and_table(tmp_path, capsys):
    out = tmp_path / "v"
    code, _ = run(["verify-qaco", "--p0-values", "0.6,0.58,0.573,0.582", "--out", str(out)], capsys)
    assert code == 0
    rows = (tmp_path / "v_verify_qaco.csv").read_text().splitlines()
    assert rows[0] == "source,shots,p0,overlap,std_error,rel_error"
    exact = rows[1].split(",")
    assert float(exact[2]) == pytest.approx(7 / 12, abs=1e-12)
    assert float(exact[3]) == pytest.approx(1 / 6, abs=1e-12)
    assert float(exact[5]) == pytest.approx(0, abs=1e-12)
    given = [r.split(",") for r in rows if r.startswith("given")]
    assert [round(100 * float(r[5]), 2) for r in given] == [16.67, 4.17, 14.16, 1.63]


def test_verify_qaco_shots_10000(capsys):
    rows = cli.verify_rows([10000], seed=0)
    _, shots, p0, *_ = rows[1]
    assert shots == 10000
    assert abs(p0 - 7 / 12) <= 3 * math.sqrt(7 / 12 * 5 / 12 / 10000)


def test_verify_qaco_some_seed_gives_table_row():
    # a 10-shot run landing on 6 zeros reproduces the 16.67% row
    hits = [seed for seed in range(200) if cli.verify_rows([10], seed)[1][2] == 0.6]
    assert hits
    assert round(100 * cli.verify_rows([10], hits[0])[1][5], 2) == 16.67


def test_conv_map_constant_box_blur_all_ones(tmp_path, capsys):
    img = tmp_path / "const.csv"
    imageio.save_csv(np.full((8, 8), 5.0), img)
    code, _ = run(["conv-map", "--image", str(img), "--kernel", "box_blur", "--out", str(tmp_path / "m")], capsys)
    assert code == 0
    grid = imageio.load_image(tmp_path / "m_hadamard_box_blur_s1.csv")
    assert np.allclose(grid, 1, atol=1e-12)
    assert (tmp_path / "m_hadamard_box_blur_s1.pgm").read_text().startswith("P2")


def test_conv_map_classical_vs_hadamard(tmp_path, capsys):
    for name in ("gradient", "checkerboard", "disk"):
        prefix = tmp_path / name
        code, _ = run(
            ["conv-map", "--image", name, "--kernel", "all", "--stride", "1,2",
             "--method", "classical,hadamard", "--out", str(prefix)],
            capsys,
        )
        assert code == 0
        for kname in ("edge_detection", "gaussian_blur", "sharpen", "emboss", "box_blur"):
            for stride in (1, 2):
                classical = imageio.load_image(f"{prefix}_classical_{kname}_s{stride}.csv")
                rescaled = imageio.load_image(f"{prefix}_hadamard_{kname}_s{stride}_rescaled.csv")
                assert np.allclose(rescaled, classical, rtol=0, atol=1e-9)


def test_conv_map_stride2_shape(tmp_path, capsys):
    code, out = run(["conv-map", "--image", "disk", "--kernel", "sharpen", "--stride", "2", "--method", "swap,adjoint"], capsys)
    assert code == 0
    assert "shape=3x3" in out.out


def test_conv_map_outputs_byte_identical(tmp_path, capsys):
    args = ["conv-map", "--image", "checkerboard", "--kernel", "emboss", "--method", "all",
            "--shots", "500", "--seed", "3", "--qpe-bits", "5"]
    run(args + ["--out", str(tmp_path / "a")], capsys)
    run(args + ["--out", str(tmp_path / "b")], capsys)
    files = sorted(p.name[1:] for p in tmp_path.glob("a_*"))
    assert files
    for name in files:
        assert (tmp_path / f"a{name}").read_bytes() == (tmp_path / f"b{name}").read_bytes()


def test_qpe_layer_command(tmp_path, capsys):
    rng = np.random.default_rng(5)
    img, kern = tmp_path / "img.csv", tmp_path / "k.csv"
    imageio.save_csv(rng.normal(size=(6, 6)), img)
    imageio.save_csv(rng.normal(size=(3, 3)), kern)
    errs = {}
    for s in (4, 8):
        code, _ = run(["qpe-layer", "--image", str(img), "--kernel", str(kern), "--qpe-bits", str(s),
                       "--out", str(tmp_path / f"q{s}")], capsys)
        assert code == 0
        lines = (tmp_path / f"q{s}_qpe_k_s1_errors.csv").read_text().splitlines()
        assert lines[0].split(",")[4] == "abs_error"
        errs[s] = max(float(line.split(",")[4]) for line in lines[1:])
    assert errs[8] <= math.pi / 2**7
    assert errs[8] <= errs[4]


def test_qpe_layer_constant_edge_detection(tmp_path, capsys):
    img = tmp_path / "c.csv"
    imageio.save_csv(np.full((6, 6), 2.0), img)
    code, _ = run(["qpe-layer", "--image", str(img), "--kernel", "edge_detection", "--out", str(tmp_path / "e")], capsys)
    assert code == 0
    assert np.allclose(imageio.load_image(tmp_path / "e_qpe_edge_detection_s1.csv"), 0, atol=math.pi / 2**7)


def test_qpe_layer_capacity_exit_code(tmp_path, capsys):
    big = tmp_path / "big.csv"
    imageio.save_csv(np.ones((32, 32)), big)
    code, out = run(["qpe-layer", "--image", str(big), "--kernel", str(big), "--qpe-bits", "10"], capsys)
    assert code == 2
    assert "s + N + 1" in out.err


def test_input_error_exit_codes(tmp_path, capsys):
    assert run(["conv-map", "--image", str(tmp_path / "missing.pgm")], capsys)[0] == 1
    assert run(["conv-map", "--kernel", "nope"], capsys)[0] == 1
    assert run(["conv-map", "--method", "magic"], capsys)[0] == 1
    assert run(["qpe-layer", "--qpe-bits", "11"], capsys)[0] == 1
    bad = tmp_path / "bad.pgm"
    bad.write_text("P2\n2 2\n255\n1 2 3\n")
    code, out = run(["conv-map", "--image", str(bad)], capsys)
    assert code == 1 and "bad.pgm:4" in out.err


def test_grad_check_command(tmp_path, capsys):
    code, out = run(["grad-check", "--seed", "4", "--out", str(tmp_path / "g")], capsys)
    assert code == 0
    rows = (tmp_path / "g_grad_check.csv").read_text().splitlines()
    assert len(rows) == 10
    assert max(float(r.split(",")[3]) for r in rows[1:]) <= 1e-6


def test_train_toy_command(tmp_path, capsys):
    code, out = run(["train-toy", "--iterations", "60", "--out", str(tmp_path / "t")], capsys)
    assert code == 0
    rows = (tmp_path / "t_train_toy.csv").read_text().splitlines()
    assert rows[0] == "iteration,loss,accuracy"
    assert len(rows) == 62
    losses = [float(r.split(",")[1]) for r in rows[1:]]
    assert all(b < a for a, b in zip(losses, losses[1:]))
