# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython kernel for the coherent-input visibility grid scan.

Same contract as _visscan_py.scan; plain C loops instead of chunked
NumPy broadcasting.
"""

import numpy as np

from libc.math cimport cos, sin, sqrt

BACKEND = "cython"


def scan(splitter, phase_mode, occupations, radii, thetas, top_k):
    S = np.asarray(splitter, dtype=complex)
    cdef int m = S.shape[0]
    cdef int pm = int(phase_mode)
    if pm == 0:
        raise ValueError("phase mode 0 would clash with the fixed-gauge mode")
    occ_arr = np.asarray(occupations, dtype=np.int64)
    cdef int N = int(occ_arr.sum())
    cdef int P = 2 * N + 1

    D = np.outer(S[:, pm], S[pm, :])
    C = S @ S - D

    outer_modes = [j for j in range(m) if j != pm]
    free_theta = [j for j in outer_modes if j != 0]
    axes_kind_py = [0] * len(outer_modes) + [1] * len(free_theta)  # 0: radius, 1: theta
    axes_mode_py = outer_modes + free_theta

    radii_f = np.asarray(radii, dtype=np.float64)
    thetas_f = np.asarray(thetas, dtype=np.float64)
    cdef double[::1] rad = radii_f
    cdef double[::1] th = thetas_f
    cdef int R = rad.shape[0]
    cdef int T = th.shape[0]

    cdef long n_outer = int(R) ** len(outer_modes) * int(T) ** len(free_theta)
    cdef int n_axes = len(axes_kind_py)
    cdef long[::1] digits = np.zeros(n_axes, dtype=np.int64)
    cdef long[::1] axes_kind = np.asarray(axes_kind_py, dtype=np.int64)
    cdef long[::1] axes_mode = np.asarray(axes_mode_py, dtype=np.int64)
    cdef long[::1] axes_size = np.asarray(
        [R if k == 0 else T for k in axes_kind_py], dtype=np.int64
    )

    cdef double[:, ::1] Cre = np.ascontiguousarray(C.real)
    cdef double[:, ::1] Cim = np.ascontiguousarray(C.imag)
    cdef double[:, ::1] Dre = np.ascontiguousarray(D.real)
    cdef double[:, ::1] Dim = np.ascontiguousarray(D.imag)

    # occupied output modes only; powers by repeated multiplication
    occm_py = [j for j in range(m) if occ_arr[j] > 0]
    cdef long[::1] occm = np.asarray(occm_py, dtype=np.int64)
    cdef long[::1] occn = np.asarray([int(occ_arr[j]) for j in occm_py], dtype=np.int64)
    cdef int n_occ = len(occm_py)

    cdef double[::1] cosq = np.cos(2.0 * np.pi * np.arange(P) / P)
    cdef double[::1] sinq = np.sin(2.0 * np.pi * np.arange(P) / P)
    cdef double[::1] cosNq = np.cos(2.0 * np.pi * N * np.arange(P) / P)
    cdef double[::1] sinNq = np.sin(2.0 * np.pi * N * np.arange(P) / P)

    cdef int K = int(top_k)
    best_scores_np = np.full(K, -1.0)
    best_outer_np = np.zeros(K, dtype=np.int64)
    best_ir_np = np.zeros(K, dtype=np.int64)
    best_it_np = np.zeros(K, dtype=np.int64)
    cdef double[::1] best_scores = best_scores_np
    cdef long[::1] best_outer = best_outer_np
    cdef long[::1] best_ir = best_ir_np
    cdef long[::1] best_it = best_it_np
    cdef double thr = -1.0

    cdef double[::1] are = np.zeros(m)
    cdef double[::1] aim = np.zeros(m)
    cdef double[::1] c0re = np.zeros(m)
    cdef double[::1] c0im = np.zeros(m)
    cdef double[::1] d0re = np.zeros(m)
    cdef double[::1] d0im = np.zeros(m)
    cdef double[::1] a2 = np.zeros(m)
    cdef double[::1] zre = np.zeros(m)
    cdef double[::1] zim = np.zeros(m)

    cdef long o, rem, idx
    cdef int ax, j, k, ir, it, q, p, kmin
    cdef double ct, st, apre, apim
    cdef double cre_j, cim_j, dre_j, dim_j
    cdef double wq, qv, s0, fre, fim, vis, amp, smin

    for o in range(n_outer):
        rem = o
        for j in range(m):
            are[j] = 0.0
            aim[j] = 0.0
        for ax in range(n_axes - 1, -1, -1):
            digits[ax] = rem % axes_size[ax]
            rem = rem // axes_size[ax]
        # radius axes precede theta axes, so the rotation sees the radius
        for ax in range(n_axes):
            idx = digits[ax]
            j = <int> axes_mode[ax]
            if axes_kind[ax] == 0:
                are[j] = rad[idx]
            else:
                ct = cos(th[idx])
                st = sin(th[idx])
                aim[j] = are[j] * st
                are[j] = are[j] * ct
        for j in range(m):
            c0re[j] = 0.0
            c0im[j] = 0.0
            d0re[j] = 0.0
            d0im[j] = 0.0
            for k in range(m):
                if k == pm:
                    continue
                c0re[j] += Cre[j, k] * are[k] - Cim[j, k] * aim[k]
                c0im[j] += Cre[j, k] * aim[k] + Cim[j, k] * are[k]
                d0re[j] += Dre[j, k] * are[k] - Dim[j, k] * aim[k]
                d0im[j] += Dre[j, k] * aim[k] + Dim[j, k] * are[k]
        for ir in range(R):
            for it in range(T):
                apre = rad[ir] * cos(th[it])
                apim = rad[ir] * sin(th[it])
                s0 = 0.0
                fre = 0.0
                fim = 0.0
                for p in range(n_occ):
                    j = <int> occm[p]
                    cre_j = c0re[j] + apre * Cre[j, pm] - apim * Cim[j, pm]
                    cim_j = c0im[j] + apre * Cim[j, pm] + apim * Cre[j, pm]
                    dre_j = d0re[j] + apre * Dre[j, pm] - apim * Dim[j, pm]
                    dim_j = d0im[j] + apre * Dim[j, pm] + apim * Dre[j, pm]
                    a2[j] = cre_j * cre_j + cim_j * cim_j + dre_j * dre_j + dim_j * dim_j
                    zre[j] = cre_j * dre_j + cim_j * dim_j
                    zim[j] = cim_j * dre_j - cre_j * dim_j
                for q in range(P):
                    qv = 1.0
                    for p in range(n_occ):
                        j = <int> occm[p]
                        wq = a2[j] + 2.0 * (zre[j] * cosq[q] - zim[j] * sinq[q])
                        if wq < 0.0:
                            wq = 0.0
                        for k in range(<int> occn[p]):
                            qv *= wq
                    s0 += qv
                    fre += qv * cosNq[q]
                    fim -= qv * sinNq[q]
                if s0 <= 0.0:
                    continue
                amp = sqrt(fre * fre + fim * fim)
                vis = 2.0 * amp / s0
                if vis > thr:
                    kmin = 0
                    smin = best_scores[0]
                    for k in range(1, K):
                        if best_scores[k] < smin:
                            smin = best_scores[k]
                            kmin = k
                    best_scores[kmin] = vis
                    best_outer[kmin] = o
                    best_ir[kmin] = ir
                    best_it[kmin] = it
                    thr = best_scores[0]
                    for k in range(1, K):
                        if best_scores[k] < thr:
                            thr = best_scores[k]

    # decode combo indices into parameter rows [r_1..r_m, t_1..t_m]
    order = np.argsort(best_scores_np, kind="stable")[::-1]
    scores = best_scores_np[order]
    params = np.zeros((K, 2 * m))
    for row, src in enumerate(order):
        if best_scores_np[src] < 0.0:
            continue
        rem_py = int(best_outer_np[src])
        decoded = [0] * n_axes
        for ax_py in range(n_axes - 1, -1, -1):
            decoded[ax_py] = rem_py % int(axes_size[ax_py])
            rem_py //= int(axes_size[ax_py])
        for ax_py in range(n_axes):
            mode = axes_mode_py[ax_py]
            if axes_kind_py[ax_py] == 0:
                params[row, mode] = radii_f[decoded[ax_py]]
            else:
                params[row, m + mode] = thetas_f[decoded[ax_py]]
        params[row, pm] = radii_f[int(best_ir_np[src])]
        params[row, m + pm] = thetas_f[int(best_it_np[src])]
    return scores, params
