"""
File formats: the binary stack/mask container, 16-bit PGM band export, and
flat ``key = value`` run configuration and report files.

Container layout (little-endian)::

    offset  size  field
    0       4     magic b"MTRS"
    4       2     format version (u16, currently 1)
    6       1     payload kind (0 = float32 values, 1 = uint8 mask)
    7       16    dims m, n, b, t (u32 each)
    23      4     value range (f32)
    27      ...   payload, time-major then band then row-major pixels

Values are stored as float32, so a save/load roundtrip is bit-exact for
float32-representable data.
"""
import csv
import math
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .cloud import DetectConfig
from .exceptions import FormatError, ShapeError
from .pipeline import PipelineConfig
from .rearrange import ImageStack, check_mask
from .similarity import SearchConfig
from .solver import SolverConfig

MAGIC = b"MTRS"
VERSION = 1
HEADER = struct.Struct("<4sHB4If")
KIND_VALUES = 0
KIND_MASK = 1


def _encode(obj):
    if isinstance(obj, ImageStack):
        payload = obj.values.astype("<f4")
        return KIND_VALUES, payload, obj.value_range
    arr = check_mask(obj)
    if arr.ndim != 4:
        raise ShapeError(f"masks must be 4-order, got shape {arr.shape}")
    return KIND_MASK, arr.astype(np.uint8), 1.0


def container_bytes(obj):
    """Serialize an :class:`ImageStack` or a 4-order mask."""
    kind, payload, value_range = _encode(obj)
    m, n, b, t = payload.shape
    header = HEADER.pack(MAGIC, VERSION, kind, m, n, b, t, value_range)
    return header + np.ascontiguousarray(payload.transpose(3, 2, 0, 1)).tobytes()


def save_container(path, obj):
    Path(path).write_bytes(container_bytes(obj))


def parse_container(data):
    """Inverse of :func:`container_bytes`."""
    if len(data) < HEADER.size:
        raise FormatError(f"truncated header: {len(data)} of {HEADER.size} bytes", len(data))
    magic, version, kind, m, n, b, t, value_range = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if kind not in (KIND_VALUES, KIND_MASK):
        raise FormatError(f"unknown payload kind {kind}", 6)
    dims = (m, n, b, t)
    for i, d in enumerate(dims):
        if d < 1:
            raise FormatError(f"dimension {i} is {d}", 7 + 4 * i)
    count = m * n * b * t
    itemsize = 4 if kind == KIND_VALUES else 1
    expected = HEADER.size + count * itemsize
    if len(data) != expected:
        raise FormatError(f"payload holds {len(data) - HEADER.size} bytes, header declares "
                          f"{count * itemsize}", min(len(data), expected))
    dtype = "<f4" if kind == KIND_VALUES else np.uint8
    flat = np.frombuffer(data, dtype=dtype, count=count, offset=HEADER.size)
    array = flat.reshape(t, b, m, n).transpose(2, 3, 1, 0)
    if kind == KIND_MASK:
        bad = np.flatnonzero(flat > 1)
        if bad.size:
            raise FormatError(f"mask byte {flat[bad[0]]} is not binary", HEADER.size + int(bad[0]))
        return np.ascontiguousarray(array)
    if not np.isfinite(value_range) or value_range <= 0:
        raise FormatError(f"invalid value range {value_range}", 23)
    return ImageStack(array.astype(float), float(value_range))


def load_container(path):
    return parse_container(Path(path).read_bytes())


def header_info(path_or_bytes):
    """Decoded header fields as a dict."""
    data = path_or_bytes if isinstance(path_or_bytes, bytes) else Path(path_or_bytes).read_bytes()
    magic, version, kind, m, n, b, t, value_range = HEADER.unpack_from(data)
    return {"magic": magic, "version": version, "kind": kind, "dims": (m, n, b, t),
            "value_range": value_range, "elements": m * n * b * t}


# ---------------------------------------------------------------------------
# 16-bit PGM band images

PGM_MAX = 65535


def band_filename(time, band):
    return f"t{time}_b{band}.pgm"


def write_pgm(path, image):
    image = np.asarray(image, dtype=np.uint16)
    h, w = image.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n{PGM_MAX}\n".encode() + image.astype(">u2").tobytes())


def read_pgm(path):
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos)
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM", 0)
    w, h, maxval = (int(tok) for tok in tokens[1:])
    pos += 1
    dtype = ">u2" if maxval > 255 else np.uint8
    expected = w * h * np.dtype(dtype).itemsize
    if len(data) - pos < expected:
        raise FormatError(f"{path}: truncated image data", len(data))
    image = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos).reshape(h, w)
    return image.astype(np.int64), maxval


def export_bands(stack, time, directory):
    """Write every band of acquisition `time` as a 16-bit PGM file.

    Values are scaled linearly so that ``value_range`` maps to 65535.
    """
    m, n, b, t = stack.shape
    if not 0 <= time < t:
        raise ShapeError(f"time index {time} out of range for {t} acquisitions")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in range(b):
        q = np.rint(stack.values[:, :, k, time] / stack.value_range * PGM_MAX)
        path = directory / band_filename(time, k)
        write_pgm(path, np.clip(q, 0, PGM_MAX))
        paths.append(path)
    return paths


def import_bands(directory, dims, value_range=255.0):
    """Read a stack of shape `dims` written by :func:`export_bands`."""
    m, n, b, t = dims
    directory = Path(directory)
    values = np.zeros(dims)
    for l in range(t):
        present = sorted(directory.glob(f"t{l}_b*.pgm"))
        if len(present) != b:
            raise ShapeError(f"time {l}: found {len(present)} band files, expected {b}")
        for k in range(b):
            path = directory / band_filename(l, k)
            if not path.exists():
                raise FileNotFoundError(path)
            image, maxval = read_pgm(path)
            if image.shape != (m, n):
                raise ShapeError(f"{path.name} is {image.shape}, expected {(m, n)}")
            values[:, :, k, l] = image / maxval * value_range
    return ImageStack(values, value_range)


# ---------------------------------------------------------------------------
# run configuration

@dataclass
class RunConfig:
    """Every tunable parameter, with the defaults used by the CLI.

    Solver parameters refer to data normalized to ``[0, 1]``.
    """

    patch_width: int = 4
    search_radius: int = 100
    search_step: int = 2
    similarity_threshold: float = 0.91
    min_group: int = 10
    min_joint_fraction: float = 0.5
    alpha1: float = 0.25
    alpha2: float = 0.25
    alpha3: float = 0.25
    alpha4: float = 0.25
    beta: float = 0.3
    epsilon: float = 1e-2
    tol: float = 1e-5
    max_iter: int = 100
    weighting: str = "current"
    normalize: bool = True
    fallback: str = "halrtc"
    halrtc_beta: float = 0.1
    threshold_step: str = "auto"
    refine_radius: int = 3
    majority: float = 0.5
    min_clear_fraction: float = 0.01
    drop_tolerance: float = 0.05
    rank_tol: float = 0.01
    seed: int = 0

    def alphas(self):
        return (self.alpha1, self.alpha2, self.alpha3, self.alpha4)

    def search_config(self):
        return SearchConfig(self.patch_width, self.search_radius, self.search_step,
                            self.similarity_threshold, self.min_group, self.min_joint_fraction)

    def solver_config(self, halrtc=False):
        return SolverConfig(self.alphas(), self.halrtc_beta if halrtc else self.beta,
                            self.epsilon, self.tol, self.max_iter, self.weighting)

    def pipeline_config(self):
        return PipelineConfig(self.search_config(), self.solver_config(), self.normalize,
                              self.fallback)

    def detect_config(self):
        step = None if self.threshold_step == "auto" else float(self.threshold_step)
        return DetectConfig(step, self.refine_radius, self.majority,
                            self.min_clear_fraction, self.drop_tolerance)

    def validate(self):
        self.pipeline_config()
        self.detect_config()
        self.solver_config(halrtc=True)
        return self

    def to_text(self):
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise FormatError(f"line {lineno}: unknown key {key!r}")
            values[key] = _convert(types[key], value, lineno)
        return cls(**values).validate()

    @classmethod
    def load(cls, path):
        return cls.from_text(Path(path).read_text())

    def as_dict(self):
        return asdict(self)


def _convert(kind, value, lineno):
    try:
        if kind in (bool, "bool"):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return value.lower() in ("true", "1", "yes")
        if kind in (int, "int"):
            return int(value)
        if kind in (float, "float"):
            return float(value)
        return value
    except ValueError:
        raise FormatError(f"line {lineno}: cannot read {value!r} as {kind}") from None


# ---------------------------------------------------------------------------
# reports

def format_value(value):
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def write_report(path, items):
    text = "".join(f"{k} = {format_value(v)}\n" for k, v in items.items())
    Path(path).write_text(text)


def read_report(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            key, value = (p.strip() for p in line.split("=", 1))
            out[key] = value
    return out


def write_scatter_csv(path, pairs):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["original", "reconstructed"])
        for orig, rec in pairs:
            writer.writerow([repr(float(orig)), repr(float(rec))])
