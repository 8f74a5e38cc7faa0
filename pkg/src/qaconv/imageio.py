"""Plain-text image and feature-map I/O (ASCII PGM and headerless CSV)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError

MAX_PGM_VAL = 65535


def _pgm_tokens(text: str):
    """Yield (token, line_number) pairs, skipping '#' comments."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for tok in line.split():
            yield tok, lineno


def parse_pgm(text: str, path=None) -> np.ndarray:
    tokens = list(_pgm_tokens(text))
    if not tokens or tokens[0][0] != "P2":
        line = tokens[0][1] if tokens else 1
        raise ParseError("expected PGM magic 'P2'", path, line)
    if len(tokens) < 4:
        raise ParseError("truncated PGM header", path, tokens[-1][1])

    def header_int(i, what):
        tok, lineno = tokens[i]
        try:
            val = int(tok)
        except ValueError:
            raise ParseError(f"bad {what} {tok!r}", path, lineno) from None
        if val < 1:
            raise ParseError(f"{what} must be positive, got {val}", path, lineno)
        return val

    width = header_int(1, "width")
    height = header_int(2, "height")
    maxval = header_int(3, "maxval")
    if maxval > MAX_PGM_VAL:
        raise ParseError(f"maxval {maxval} exceeds {MAX_PGM_VAL}", path, tokens[3][1])
    body = tokens[4:]
    if len(body) != width * height:
        line = body[-1][1] if body else tokens[3][1]
        raise ParseError(
            f"expected {width * height} pixels for {width}x{height}, found {len(body)}", path, line
        )
    pixels = np.empty(width * height)
    for i, (tok, lineno) in enumerate(body):
        try:
            val = int(tok)
        except ValueError:
            raise ParseError(f"bad pixel value {tok!r}", path, lineno) from None
        if not 0 <= val <= maxval:
            raise ParseError(f"pixel {val} outside 0..{maxval}", path, lineno)
        pixels[i] = val
    return pixels.reshape(height, width)


def parse_csv(text: str, path=None) -> np.ndarray:
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError as exc:
            raise ParseError(f"non-numeric field ({exc})", path, lineno) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"row has {len(row)} fields, expected {width}", path, lineno)
        rows.append(row)
    if not rows:
        raise ParseError("no data rows", path, 1)
    return np.array(rows, dtype=float)


def load_image(path) -> np.ndarray:
    """Read a P2 PGM or a headerless CSV of reals into a 2-D float array."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read image ({exc.strerror})", path) from None
    if text.lstrip().startswith("P"):
        return parse_pgm(text, path)
    return parse_csv(text, path)


def format_csv(grid) -> str:
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    return "".join(",".join(f"{v:.17g}" for v in row) + "\n" for row in grid)


def format_pgm(pixels, maxval: int = 255) -> str:
    pixels = np.atleast_2d(np.asarray(pixels))
    height, width = pixels.shape
    lines = ["P2", f"{width} {height}", str(maxval)]
    lines += [" ".join(str(int(v)) for v in row) for row in pixels]
    return "\n".join(lines) + "\n"


def render_gray(grid) -> np.ndarray:
    """Min-max scale to integers 0..255; a flat map renders as 128."""
    grid = np.asarray(grid, dtype=float)
    lo, hi = float(grid.min()), float(grid.max())
    if hi == lo:
        return np.full(grid.shape, 128, dtype=int)
    return np.rint((grid - lo) / (hi - lo) * 255).astype(int)


def save_csv(grid, path) -> None:
    Path(path).write_text(format_csv(grid))


def save_pgm(pixels, path, maxval: int = 255) -> None:
    """Write integer pixels as-is."""
    Path(path).write_text(format_pgm(pixels, maxval))


def save_map(grid, path) -> None:
    """CSV at full precision, or a grayscale rendering when ``path`` ends in .pgm."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        save_pgm(render_gray(grid), path)
    else:
        save_csv(grid, path)
