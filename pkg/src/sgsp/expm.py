"""Matrix exponential by Pade scaling and squaring (Higham 2005 parameters)."""

import numpy as np

_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}


def _pade(A, m):
    b = _PADE[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A2 @ A4
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    else:
        powers = [ident, A2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ A2)
        U = sum(b[j] * powers[j // 2] for j in range(m, 0, -2))
        U = A @ U
        V = sum(b[j] * powers[j // 2] for j in range(m - 1, -1, -2))
    return np.linalg.solve(V - U, V + U)


def expm(A):
    """``e^A`` for a square array.

    Uses the lowest Pade degree whose 1-norm threshold covers ``A``, otherwise
    degree 13 after scaling by a power of two and squaring back.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expm needs a square matrix")
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    norm1 = np.linalg.norm(A, 1)
    if norm1 == 0:
        return np.eye(A.shape[0], dtype=A.dtype)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            return _pade(A, m)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    F = _pade(A / 2.0**s, 13)
    for _ in range(s):
        F = F @ F
    return F
