"""Exact flag-algebra toolkit for upper bounds on induced subgraph densities."""

from .algebra import QuantumGraph, lift, parse_quantum, product_ind, quadratic_form, unlabel
from .certificate import Certificate, CertificateBlock, load_certificate, save_certificate, shipped_certificate, verify
from .densities import StepGraphon, builtin_graphon, t_hom, t_ind_graph
from .graphs import LabeledGraph, canonical, enumerate_graphs, format_graph, parse_graph
from .linalg import psd_check_exact

__all__ = [
    "Certificate",
    "CertificateBlock",
    "LabeledGraph",
    "QuantumGraph",
    "StepGraphon",
    "builtin_graphon",
    "canonical",
    "enumerate_graphs",
    "format_graph",
    "lift",
    "load_certificate",
    "parse_graph",
    "parse_quantum",
    "product_ind",
    "psd_check_exact",
    "quadratic_form",
    "save_certificate",
    "shipped_certificate",
    "t_hom",
    "t_ind_graph",
    "unlabel",
    "verify",
]
