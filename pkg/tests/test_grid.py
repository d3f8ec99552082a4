import numpy as np
import pytest

from ruminheat.grid import (
    GridSection,
    GridSpec,
    boundary_mass,
    convolve_small,
    dilate_resample,
    export_axis_csv,
    gaussian_bump,
    inner_product,
    l2_norm,
    load_section,
    lp_norm,
    mollifier,
    sample_at,
    save_section,
    total_integral,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        GridSpec.cube(1, 16, 2.0)  # even point count
    with pytest.raises(ValueError):
        GridSpec(1, (9, 9), (1.0, 1.0))  # wrong axis count
    spec = GridSpec.cube(1, 9, 2.0)
    assert spec.shape == (9, 9, 9)
    assert spec.half_widths == (2.0, 2.0, 4.0)  # t defaults to half_width^2
    assert spec.spacing[0] == pytest.approx(0.5)
    # origin is a node
    assert spec.axis_coords(0)[4] == 0.0


def test_inner_product_and_norms():
    spec = GridSpec.cube(1, 17, 2.0, 2.0)
    u = gaussian_bump(spec, (0.5, 0.5, 0.5))
    assert inner_product(u, u) > 0
    assert l2_norm(GridSection.zeros(spec, 0, 1)) == 0.0
    c = 3.7
    assert l2_norm(u.scale(c)) == pytest.approx(abs(c) * l2_norm(u), rel=1e-13)
    assert lp_norm(u.scale(-c), 1) == pytest.approx(c * lp_norm(u, 1), rel=1e-13)
    with pytest.raises(ValueError):
        inner_product(u, GridSection.zeros(GridSpec.cube(1, 9, 2.0), 0, 1))


def test_gaussian_l2_norm_against_closed_form():
    # int exp(-x^2/w^2) dx = w sqrt(pi) per axis
    spec = GridSpec.cube(1, 65, 4.0, 4.0)
    w = (0.6, 0.7, 0.8)
    u = gaussian_bump(spec, w)
    expected = np.sqrt(np.prod([wi * np.sqrt(np.pi) for wi in w]))
    assert l2_norm(u) == pytest.approx(expected, rel=1e-3)


def test_quadrature_refinement_order():
    # tent profile: C^0 kink so the Riemann error is genuinely algebraic
    w = 1.3
    expected = np.sqrt((2.0 * w**3 / 3.0) ** 3)
    errs = []
    for pts in (17, 33, 65):
        spec = GridSpec.cube(1, pts, 2.0, 2.0)
        tent = GridSection.from_function(
            spec, 0, [lambda x, y, t: np.maximum(w - np.abs(x), 0.0)
                      * np.maximum(w - np.abs(y), 0.0)
                      * np.maximum(w - np.abs(t), 0.0)]
        )
        errs.append(abs(l2_norm(tent) - expected) / expected)
    assert errs[2] < errs[1] < errs[0]
    assert np.log2(errs[0] / errs[2]) / 2.0 >= 1.5  # order >= ~1.5 per halving


def test_total_integral_and_boundary_mass():
    spec = GridSpec.cube(1, 33, 3.0, 3.0)
    m = mollifier(spec, (0.4, 0.4, 0.4))
    assert total_integral(m)[0] == pytest.approx(1.0, rel=1e-12)
    assert boundary_mass(m) < 1e-8
    edge = GridSection.zeros(spec, 0, 1)
    edge.data[0, 0, 0, 0] = 1.0
    assert boundary_mass(edge) == 1.0


def test_dilate_resample_identity_and_consistency():
    spec = GridSpec.cube(1, 33, 2.0, 2.0)
    u = gaussian_bump(spec, (0.5, 0.5, 0.5))
    same = dilate_resample(u, 1.0)
    assert np.allclose(same.data, u.data, atol=1e-14)
    with pytest.raises(ValueError):
        dilate_resample(u, 0.5)
    # gauge-radial data: resampled field equals the dilated closed form
    r = 2.0
    v = dilate_resample(u, r)
    xs = spec.meshgrid()
    exact = np.exp(-0.5 * ((xs[0] / r / 0.5) ** 2 + (xs[1] / r / 0.5) ** 2 + (xs[2] / r**2 / 0.5) ** 2))
    # multilinear interpolation of a ~2-cell t-feature: a few percent
    assert np.max(np.abs(v.data[0] - exact)) < 0.04


def test_dilate_resample_refinement():
    errs = []
    for pts in (17, 33, 65):
        spec = GridSpec.cube(1, pts, 2.0, 2.0)
        u = gaussian_bump(spec, (0.5, 0.5, 0.5))
        v = dilate_resample(u, 2.0)
        xs = spec.meshgrid()
        exact = np.exp(
            -0.5 * ((xs[0] / 1.0) ** 2 + (xs[1] / 1.0) ** 2 + (xs[2] / 4.0 / 0.5) ** 2)
        )
        errs.append(float(np.max(np.abs(v.data[0] - exact))))
    assert errs[2] < errs[1] < errs[0]


def test_sample_at_zero_outside():
    spec = GridSpec.cube(1, 9, 1.0, 1.0)
    u = gaussian_bump(spec, (0.4, 0.4, 0.4))
    pts = np.array([[5.0], [0.0], [0.0]])
    assert sample_at(u, pts)[0, 0] == 0.0


def test_convolution_approximate_identity():
    spec = GridSpec.cube(1, 21, 2.0, 2.0)
    u = gaussian_bump(spec, (0.8, 0.8, 0.8))
    kspec = GridSpec.cube(1, 7, 0.45, 0.45)
    k = mollifier(kspec, (0.15, 0.15, 0.15))
    conv = convolve_small(u, k)
    rel = l2_norm(conv - u) / l2_norm(u)
    assert rel < 0.05
    # narrower kernel approximates better
    k2 = mollifier(GridSpec.cube(1, 7, 0.3, 0.3), (0.1, 0.1, 0.1))
    rel2 = l2_norm(convolve_small(u, k2) - u) / l2_norm(u)
    assert rel2 < rel


def test_convolution_support_guard():
    spec = GridSpec.cube(1, 21, 2.0, 2.0)
    u = gaussian_bump(spec, (0.8, 0.8, 0.8))
    big = GridSpec.cube(1, 21, 1.0, 1.0)
    with pytest.raises(ValueError):
        convolve_small(u, gaussian_bump(big, (0.3, 0.3, 0.3)))


def test_convolution_associativity():
    # (u * k1) * k2 ~ u * (k1 * k2) within quadrature error
    spec = GridSpec.cube(1, 17, 2.0, 2.0)
    u = gaussian_bump(spec, (0.7, 0.7, 0.7))
    kspec = GridSpec.cube(1, 7, 0.6, 0.6)
    k1 = mollifier(kspec, (0.24, 0.24, 0.24))
    k2 = mollifier(kspec, (0.3, 0.3, 0.3))
    lhs = convolve_small(convolve_small(u, k1), k2)
    k12spec = GridSpec.cube(1, 13, 1.2, 1.25)
    k12 = convolve_small(GridSection(k12spec, 0, _resample_to(k1, k12spec)), k2)
    rhs = convolve_small(u, k12)
    rel = l2_norm(lhs - rhs) / l2_norm(lhs)
    assert rel < 0.02


def _resample_to(u, spec):
    coords = np.stack(spec.meshgrid())
    return sample_at(u, coords)


def test_serialization_roundtrip(tmp_path):
    spec = GridSpec.cube(1, 9, 1.5, 1.5)
    u = GridSection(spec, 2, np.random.RandomState(3).randn(2, 9, 9, 9))
    path = str(tmp_path / "field.grid")
    save_section(path, u)
    v = load_section(path)
    assert v.spec == spec and v.degree == 2
    assert np.array_equal(u.data, v.data)


def test_axis_csv(tmp_path):
    spec = GridSpec.cube(1, 9, 1.0, 1.0)
    u = gaussian_bump(spec, (0.5, 0.5, 0.5))
    path = str(tmp_path / "slice.csv")
    export_axis_csv(path, u, axis=0)
    lines = open(path).read().strip().split("\n")
    assert lines[0] == "coord,comp0"
    assert len(lines) == 10
