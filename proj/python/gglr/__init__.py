"""Gradient graph Laplacian regularized image restoration."""

from ._core import (
    SolverSettings,
    add_awgn,
    build_prior,
    col_pair_selector,
    col_selector,
    gft,
    gglr,
    glr,
    grad_op,
    interleave_grad_op,
    laplacian,
    make_gaussian_kernel,
    make_mask,
    normalized_weights,
    psnr,
    random_walk_laplacian,
    restore,
    row_pair_selector,
    row_selector,
    selftest,
    solve_patch,
    spectrum,
    ssim,
    tse_filter,
)

__all__ = [
    "SolverSettings",
    "add_awgn",
    "build_prior",
    "col_pair_selector",
    "col_selector",
    "gft",
    "gglr",
    "glr",
    "grad_op",
    "interleave_grad_op",
    "laplacian",
    "make_gaussian_kernel",
    "make_mask",
    "normalized_weights",
    "psnr",
    "random_walk_laplacian",
    "restore",
    "row_pair_selector",
    "row_selector",
    "selftest",
    "solve_patch",
    "spectrum",
    "ssim",
    "tse_filter",
]
