"""Pure-Python accumulation kernel for aggregate metrics.

Both kernels (this one and the compiled twin in ``_kernels.pyx``) share the
same contract: given per-element cluster codes for the base, experiment,
and ideal clusterings plus per-element weights, return weight-weighted sums
of the pointwise metrics, all accumulated in the caller-supplied element
order.

Numerical layout matters more than it looks:

* Cluster weights and contingency cells are accumulated with plain ``+=``
  in universe order. Two clusterings that induce the same partition then
  produce bit-identical cluster/cell sums, so their pointwise distance is
  exactly 0.0 and quotient metrics hit their endpoints exactly.
* The final metric sums use Neumaier compensation, with the exact operation
  order of the compiled kernel, so the two backends return bit-identical
  values and aggregate error stays at a few ulp even for millions of
  elements.
* Jaccard distance is evaluated as diff / (diff + intersection), which is
  bitwise symmetric in its two cluster arguments, so swapping base and
  experiment reproduces the same distances exactly.
"""

from __future__ import annotations

BACKEND_NAME = "pure"


def impact_sums(b, e, w, nb, ne):
    """Sums of weighted pointwise (jd, split, merge) plus total weight."""
    if type(w) is not list:  # plain floats keep the sums plain floats
        w = [float(wk) for wk in w]
    n = len(w)
    wb = [0.0] * nb
    we = [0.0] * ne
    cell_be: dict[tuple[int, int], float] = {}
    for k in range(n):
        wk = w[k]
        bk = b[k]
        ek = e[k]
        wb[bk] += wk
        we[ek] += wk
        kb = (bk, ek)
        cell_be[kb] = cell_be.get(kb, 0.0) + wk

    acc_s = [0.0] * 4
    acc_c = [0.0] * 4
    for k in range(n):
        wk = w[k]
        wbb = wb[b[k]]
        wee = we[e[k]]
        ibe = cell_be[(b[k], e[k])]
        bs = wbb - ibe
        es = wee - ibe
        diff = bs + es
        vals = (
            wk * (diff / (diff + ibe)),
            wk * (bs / wbb),
            wk * (es / wee),
            wk,
        )
        for j in range(4):
            y = vals[j]
            s = acc_s[j]
            t = s + y
            if abs(s) >= abs(y):
                acc_c[j] += (s - t) + y
            else:
                acc_c[j] += (y - t) + s
            acc_s[j] = t
    return tuple(acc_s[j] + acc_c[j] for j in range(4))


def full_sums(b, e, i, w, nb, ne, ni):
    """Sums for the full quality report.

    Returns a 12-tuple of weighted sums:
    (jd_be, split, merge, good_split, bad_split, good_merge, bad_merge,
     delta_precision, delta_recall, jd_base_ideal, jd_exp_ideal, total).
    """
    if type(w) is not list:  # plain floats keep the sums plain floats
        w = [float(wk) for wk in w]
    n = len(w)
    wb = [0.0] * nb
    we = [0.0] * ne
    wi = [0.0] * ni
    cell_be: dict[tuple[int, int], float] = {}
    cell_bi: dict[tuple[int, int], float] = {}
    cell_ei: dict[tuple[int, int], float] = {}
    cell_3: dict[tuple[int, int, int], float] = {}
    for k in range(n):
        wk = w[k]
        bk = b[k]
        ek = e[k]
        ik = i[k]
        wb[bk] += wk
        we[ek] += wk
        wi[ik] += wk
        kb = (bk, ek)
        cell_be[kb] = cell_be.get(kb, 0.0) + wk
        kb = (bk, ik)
        cell_bi[kb] = cell_bi.get(kb, 0.0) + wk
        kb = (ek, ik)
        cell_ei[kb] = cell_ei.get(kb, 0.0) + wk
        kt = (bk, ek, ik)
        cell_3[kt] = cell_3.get(kt, 0.0) + wk

    acc_s = [0.0] * 12
    acc_c = [0.0] * 12
    for k in range(n):
        wk = w[k]
        bk = b[k]
        ek = e[k]
        ik = i[k]
        wbb = wb[bk]
        wee = we[ek]
        wii = wi[ik]
        ibe = cell_be[(bk, ek)]
        ibi = cell_bi[(bk, ik)]
        iei = cell_ei[(ek, ik)]
        i3 = cell_3[(bk, ek, ik)]
        bs = wbb - ibe
        es = wee - ibe
        diff = bs + es
        bad_split_w = ibi - i3
        good_merge_w = iei - i3
        diff_bi = (wbb - ibi) + (wii - ibi)
        diff_ei = (wee - iei) + (wii - iei)
        vals = (
            wk * (diff / (diff + ibe)),
            wk * (bs / wbb),
            wk * (es / wee),
            wk * ((bs - bad_split_w) / wbb),
            wk * (bad_split_w / wbb),
            wk * (good_merge_w / wee),
            wk * ((es - good_merge_w) / wee),
            wk * (iei / wee - ibi / wbb),
            wk * ((iei - ibi) / wii),
            wk * (diff_bi / (diff_bi + ibi)),
            wk * (diff_ei / (diff_ei + iei)),
            wk,
        )
        for j in range(12):
            y = vals[j]
            s = acc_s[j]
            t = s + y
            if abs(s) >= abs(y):
                acc_c[j] += (s - t) + y
            else:
                acc_c[j] += (y - t) + s
            acc_s[j] = t
    return tuple(acc_s[j] + acc_c[j] for j in range(12))
