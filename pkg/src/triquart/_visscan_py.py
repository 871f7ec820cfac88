"""NumPy fallback for the coherent-input visibility grid scan.

Scans the N-fold fringe visibility of one output pattern over a grid of
coherent input amplitudes |alpha_i| e^{i theta_i}. The phase of mode 1 is
fixed to 0; a common phase rotation of all inputs leaves every |beta_j(phi)|
unchanged, so this loses no candidates.

The scan axes are split so that the phase-shifter mode's amplitude runs in
an inner axis while everything else is vectorized in chunks.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _top_merge(scores, params, new_scores, new_params, top_k):
    s = np.concatenate([scores, new_scores])
    p = np.vstack([params, new_params])
    order = np.argsort(s, kind="stable")[::-1][:top_k]
    return s[order], p[order]


def scan(splitter, phase_mode, occupations, radii, thetas, top_k):
    """Return (scores, params) of the top_k visibility combos.

    splitter: complex (m, m) splitter matrix (used on both sides of the
        phase layer).
    phase_mode: 0-based index of the mode carrying the scanned phase.
    occupations: output photon pattern, length m.
    radii, thetas: 1-D float grids for |alpha_i| and theta_i.
    params rows are [r_1..r_m, t_1..t_m] with t_1 = 0.
    """
    S = np.asarray(splitter, dtype=complex)
    m = S.shape[0]
    pm = int(phase_mode)
    if pm == 0:
        raise ValueError("phase mode 0 would clash with the fixed-gauge mode")
    occ = np.asarray(occupations, dtype=np.int64)
    N = int(occ.sum())
    P = 2 * N + 1
    phis = 2.0 * np.pi * np.arange(P) / P

    # beta(phi) = c + d e^{-i phi} with c = C alpha, d = D alpha
    D = np.outer(S[:, pm], S[pm, :])
    C = S @ S - D

    outer_modes = [j for j in range(m) if j != pm]
    free_theta = [j for j in outer_modes if j != 0]

    radii = np.asarray(radii, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    R = len(radii)
    T = len(thetas)
    n_outer = R ** len(outer_modes) * T ** len(free_theta)
    inner_alpha = (radii[:, None] * np.exp(1j * thetas)[None, :]).ravel()  # R*T
    n_inner = inner_alpha.size

    outer_axes = [("r", j) for j in outer_modes] + [("t", j) for j in free_theta]
    sizes = [R if kind == "r" else T for kind, _ in outer_axes]

    best_scores = np.full(top_k, -1.0)
    best_params = np.zeros((top_k, 2 * m))

    exp_iphi = np.exp(1j * phis)
    ein = np.exp(-1j * N * phis)
    chunk = max(1, (1 << 21) // (n_inner * P))

    for lo in range(0, n_outer, chunk):
        sel = np.arange(lo, min(lo + chunk, n_outer))
        combo = np.empty((sel.size, len(sizes)), dtype=np.int64)
        rem = sel.copy()
        for axis in range(len(sizes) - 1, -1, -1):
            combo[:, axis] = rem % sizes[axis]
            rem //= sizes[axis]
        alpha = np.zeros((sel.size, m), dtype=complex)
        for axis, (kind, mode) in enumerate(outer_axes):
            if kind == "r":
                alpha[:, mode] += radii[combo[:, axis]]
        for axis, (kind, mode) in enumerate(outer_axes):
            if kind == "t":
                alpha[:, mode] *= np.exp(1j * thetas[combo[:, axis]])

        c = alpha @ C.T  # (chunk, m)
        d = alpha @ D.T
        c = c[:, None, :] + inner_alpha[None, :, None] * C[:, pm][None, None, :]
        d = d[:, None, :] + inner_alpha[None, :, None] * D[:, pm][None, None, :]
        a2 = np.abs(c) ** 2 + np.abs(d) ** 2  # (chunk, inner, m)
        z = c * d.conj()

        # log of Q(phi) = prod_j |beta_j|^{2 n_j}; scale-shift keeps the
        # A_N / A_0 ratio exact even when Q underflows or touches zero
        logq = np.zeros((sel.size, n_inner, P))
        for j in range(m):
            if occ[j] == 0:
                continue
            w = a2[:, :, j, None] + 2.0 * (
                z[:, :, j, None].real * exp_iphi.real[None, None, :]
                - z[:, :, j, None].imag * exp_iphi.imag[None, None, :]
            )
            np.clip(w, 0.0, None, out=w)
            with np.errstate(divide="ignore"):
                logq += occ[j] * np.log(w)
        with np.errstate(invalid="ignore"):
            q = np.exp(logq - logq.max(axis=2, keepdims=True))
        q[~np.isfinite(q)] = 0.0
        a0 = q.mean(axis=2)
        an = np.abs(q @ ein) / P
        with np.errstate(divide="ignore", invalid="ignore"):
            vis = np.where(a0 > 0.0, 2.0 * an / a0, 0.0)
        vis = np.where(np.isfinite(vis), vis, 0.0)

        flat = vis.ravel()
        take = min(top_k, flat.size)
        top = np.argpartition(flat, -take)[-take:]
        params = np.zeros((take, 2 * m))
        for row, f in enumerate(top):
            o, i = divmod(int(f), n_inner)
            for axis, (kind, mode) in enumerate(outer_axes):
                if kind == "r":
                    params[row, mode] = radii[combo[o, axis]]
                else:
                    params[row, m + mode] = thetas[combo[o, axis]]
            ir, it = divmod(i, T)
            params[row, pm] = radii[ir]
            params[row, m + pm] = thetas[it]
        best_scores, best_params = _top_merge(
            best_scores, best_params, flat[top], params, top_k
        )
    return best_scores, best_params
