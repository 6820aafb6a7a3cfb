"""Numpy implementations of the hot kernels, used when the compiled module is absent."""
import numpy as np


def branch_fidelity_sum(psi, branches, corrections):
    """Per-sample sum over branches of ``|<psi|C_b v_b>|^2``.

    psi: (T, d); branches: (T, B, d) unnormalized receiver vectors;
    corrections: (B, d, d). Returns shape (T,).
    """
    out = np.einsum("bij,tbj->tbi", corrections, branches)
    ov = np.einsum("ti,tbi->tb", psi.conj(), out)
    return (ov.real ** 2 + ov.imag ** 2).sum(axis=1)


def psd_mask(gram, p, tol):
    """Mask of rows of ``p`` for which ``gram - diag(p)`` has minimum eigenvalue >= -tol."""
    d = gram.shape[0]
    q = np.broadcast_to(gram, (p.shape[0], d, d)).copy()
    idx = np.arange(d)
    q[:, idx, idx] -= p
    return np.linalg.eigvalsh(q)[:, 0] >= -tol
