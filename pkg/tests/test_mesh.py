import numpy as np
import pytest

from msdfrac import build_mesh, refine


def test_grading_formula():
    mesh = build_mesh(2.0, 8, 3.0)
    m = np.arange(9)
    assert np.allclose(mesh.nodes, 2.0 * (m / 8.0) ** 3.0, rtol=0, atol=0)
    assert mesh.nodes[0] == 0.0
    assert mesh.nodes[-1] == 2.0  # endpoint exact, not just close
    assert np.all(np.diff(mesh.nodes) > 0)
    assert np.allclose(mesh.steps, np.diff(mesh.nodes))


def test_uniform_flag_and_base_step():
    mesh = build_mesh(1.0, 10, 1.0)
    assert mesh.uniform
    assert mesh.base_step == pytest.approx(0.1)
    graded = build_mesh(1.0, 10, 2.0)
    assert not graded.uniform


@pytest.mark.parametrize("r", [1.0, 1.75, 3.0, 7.0])
@pytest.mark.parametrize("M", [4, 32, 100])
def test_refine_is_bit_exact_nested(M, r):
    coarse = build_mesh(1.0, M, r)
    fine = refine(coarse)
    assert fine.M == 2 * M
    # two-mesh comparison relies on exact node sharing, not approximate
    assert np.array_equal(fine.nodes[::2], coarse.nodes)
    assert coarse.refine().M == fine.M


def test_validation():
    with pytest.raises(ValueError):
        build_mesh(-1.0, 8)
    with pytest.raises(ValueError):
        build_mesh(1.0, 0)
    with pytest.warns(UserWarning):
        build_mesh(1.0, 8, 0.5)  # r < 1 allowed but outside the theory
