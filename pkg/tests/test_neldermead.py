import numpy as np
import pytest

from nfswarm.errors import DomainError
from nfswarm.estimation import NelderMeadOptions, initial_simplex, nelder_mead


def rosenbrock(x):
    return float(np.sum(100 * (x[1:] - x[:-1] ** 2) ** 2 + (1 - x[:-1]) ** 2))


class TestNelderMead:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_quadratic_converges_to_center(self, n):
        c = np.linspace(-1, 1, n) + 0.3
        out = nelder_mead(lambda x: float(np.sum((x - c) ** 2)), np.zeros(n),
                          NelderMeadOptions(max_iter=200 * n, tol=1e-16))
        assert np.abs(out.x - c).max() <= 1e-6
        assert out.converged

    def test_quadratic_six_dims_objective(self):
        # fixed-coefficient simplex search slows down in higher dimension;
        # the objective still gets small within the budget
        c = np.arange(6) * 0.2
        out = nelder_mead(lambda x: float(np.sum((x - c) ** 2)), np.zeros(6),
                          NelderMeadOptions(max_iter=1200, tol=1e-14))
        assert out.fun <= 1e-6

    def test_rosenbrock(self):
        out = nelder_mead(rosenbrock, np.array([-1.2, 1.0]), NelderMeadOptions(max_iter=2000, tol=1e-14))
        np.testing.assert_allclose(out.x, [1.0, 1.0], atol=1e-4)

    def test_never_worse_than_start(self, rng):
        f = lambda x: float(np.sin(5 * x[0]) + np.cos(3 * x[1]) + 0.1 * x @ x)  # noqa: E731
        for _ in range(10):
            x0 = rng.uniform(-3, 3, 2)
            assert nelder_mead(f, x0, NelderMeadOptions(max_iter=50)).fun <= f(x0)

    def test_bounds_respected(self):
        seen = []

        def f(x):
            seen.append(x.copy())
            return float(np.sum((x - 5) ** 2))

        out = nelder_mead(f, np.zeros(2), NelderMeadOptions(max_iter=300), bounds=([-1, -1], [1, 2]))
        assert np.all(np.array(seen) <= [1, 2]) and np.all(np.array(seen) >= -1)
        np.testing.assert_allclose(out.x, [1, 2], atol=1e-6)

    def test_zero_iterations(self):
        out = nelder_mead(lambda x: float(x @ x), np.ones(3), NelderMeadOptions(max_iter=0))
        assert out.iterations == 0 and out.evaluations == 4

    def test_constant_function_converges_immediately(self):
        out = nelder_mead(lambda x: 1.0, np.ones(2))
        assert out.converged and out.iterations == 0

    def test_non_finite(self):
        with pytest.raises(DomainError, match="not finite"):
            nelder_mead(lambda x: float("nan"), np.ones(2))

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            nelder_mead(lambda x: 0.0, np.array([]))
        with pytest.raises(DomainError):
            nelder_mead(lambda x: 0.0, np.ones(2), simplex=np.zeros((2, 2)))
        with pytest.raises(DomainError):
            NelderMeadOptions(max_iter=-1)

    def test_initial_simplex(self):
        s = initial_simplex(np.array([1.0, 2.0]), [0.1, 0.2])
        np.testing.assert_allclose(s, [[1, 2], [1.1, 2], [1, 2.2]])
