"""Adaptive rational decompositions in weighted Bergman spaces of the disc and upper half-plane."""

from .funcspace import BlackBox, KernelMix, PowerKernel, TaylorSeries, inner, norm_squared
from .kernels import DomainError, KernelRef, Space, kernel_eval, kernel_inner, normalized_kernel
from .orthosystem import BROSystem, DegenerateExtensionError, ParamSeq
from .poafd import Decomposition, SelectionConfig, SelectionExhausted, decompose, select_next, selection_objective

__all__ = [
    "BROSystem",
    "BlackBox",
    "Decomposition",
    "DegenerateExtensionError",
    "DomainError",
    "KernelMix",
    "KernelRef",
    "ParamSeq",
    "PowerKernel",
    "SelectionConfig",
    "SelectionExhausted",
    "Space",
    "TaylorSeries",
    "decompose",
    "inner",
    "kernel_eval",
    "kernel_inner",
    "norm_squared",
    "normalized_kernel",
    "select_next",
    "selection_objective",
]
