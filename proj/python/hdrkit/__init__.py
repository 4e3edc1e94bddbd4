"""HDR imaging toolkit: formats, tone mapping, expansion, metrics and layered coding."""

from ._hdrkit import (
    Error,
    expand,
    extract_base,
    log_psnr,
    pack,
    pq_eotf,
    pq_oetf,
    pu_encode,
    pu_psnr,
    pu_ssim,
    read_image,
    run,
    tonemap,
    unpack,
    write_image,
)

__all__ = [
    "Error",
    "expand",
    "extract_base",
    "log_psnr",
    "pack",
    "pq_eotf",
    "pq_oetf",
    "pu_encode",
    "pu_psnr",
    "pu_ssim",
    "read_image",
    "run",
    "tonemap",
    "unpack",
    "write_image",
]
