import subprocess
import sys

import numpy as np

from accelsum import _kernels


def test_conv_center_matches_reference():
    rng = np.random.default_rng(0)
    for n in (15, 61, 121):
        f = rng.normal(size=n) + 1j * rng.normal(size=n)
        g = rng.normal(size=n) + 1j * rng.normal(size=n)
        fast = _kernels.conv_center(f, g)
        ref = _kernels.conv_center_reference(f, g)
        assert np.max(np.abs(fast - ref)) < 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_conv_center_batch_matches_single():
    rng = np.random.default_rng(1)
    fa = rng.normal(size=(7, 61)) + 1j * rng.normal(size=(7, 61))
    ga = rng.normal(size=(7, 61)) + 1j * rng.normal(size=(7, 61))
    batch = _kernels.conv_center_batch(fa, ga)
    for r in range(7):
        single = _kernels.conv_center(fa[r], ga[r])
        assert np.max(np.abs(batch[r] - single)) < 1e-12


def test_numpy_fallback_agrees_with_active_path():
    """Run the same convolution under ACCELSUM_NO_NUMBA in a subprocess
    and compare bytes of the result."""
    code = (
        "import numpy as np\n"
        "from accelsum import _kernels\n"
        "rng = np.random.default_rng(7)\n"
        "f = rng.normal(size=61) + 1j * rng.normal(size=61)\n"
        "g = rng.normal(size=61) + 1j * rng.normal(size=61)\n"
        "out = _kernels.conv_center(f, g)\n"
        "print(repr(_kernels.USING_NUMBA))\n"
        "print(out.tobytes().hex())\n"
    )
    env_plain = {"ACCELSUM_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"}
    plain = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True,
        env=env_plain, check=True,
    ).stdout.strip().splitlines()
    assert plain[0] == "False"
    rng = np.random.default_rng(7)
    f = rng.normal(size=61) + 1j * rng.normal(size=61)
    g = rng.normal(size=61) + 1j * rng.normal(size=61)
    here = _kernels.conv_center(f, g)
    other = np.frombuffer(bytes.fromhex(plain[1]), dtype=np.complex128)
    assert np.max(np.abs(here - other)) < 1e-13
