"""Video watermarking in motion-active luma blocks via keyed DCT coefficient swaps."""

from ._accel import BACKEND
from .attack import CodecAttackSpec, codec_attack, requant_attack
from .embed import EmbedParams, EmbedReport, embed, embed_bit
from .errors import (
    AttackExecutionError,
    CapacityError,
    FormatError,
    ParameterError,
    SinkError,
    SyncError,
    TruncationError,
    UnsupportedFormatError,
    WatermarkError,
)
from .extract import ExtractParams, VoteTally, extract, extract_bit
from .keystream import KeyStream
from .metrics import ber, normalized_correlation, psnr
from .selection import BlockRef, WbMap, read_wbmap, residual_energy, select_wbs, write_wbmap
from .transform import dct2d, idct2d, zigzag_index
from .video_io import (
    LumaSequence,
    Payload,
    VideoMeta,
    read_pbm,
    read_raw_i420,
    read_y4m,
    write_pbm,
    write_y4m,
)

__version__ = "0.1.0"
