import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divdelaunay import quadratic
from divdelaunay.errors import InputError
from divdelaunay.metric_field import MetricField
from divdelaunay.sites import (NetParams, SiteSet, generate_epsilon_net, generate_random, load_sites,
                               save_sites, sigma_surrogate)


@given(st.integers(1, 40), st.integers(0, 2**31))
def test_random_sites_are_reproducible_and_inside(n, seed):
    rect = (0.25, -1.0, 0.75, 2.0)
    a, b = generate_random(rect, n, seed), generate_random(rect, n, seed)
    assert np.array_equal(a.points, b.points) and len(a) == n
    assert np.all((a.points >= rect[:2]) & (a.points <= rect[2:]))


def test_duplicates_rejected():
    with pytest.raises(InputError):
        SiteSet(np.array([[0.0, 0.0], [0.0, 0.0]]))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.06, 0.2), st.integers(0, 1000))
def test_epsilon_net_covers_and_packs(eps, seed):
    d = quadratic(np.diag([1.0, 4.0]))
    net = generate_epsilon_net(d, (0, 0, 1, 1), NetParams(eps, 0.0, seed), probe_dims=(33, 33))
    xs, ys = np.meshgrid(np.linspace(0, 1, 33), np.linspace(0, 1, 33))
    probes = np.column_stack([xs.ravel(), ys.ravel()])
    cover = np.min([d.eval_to_points(s, probes) for s in net.points], axis=0)
    assert cover.max() <= eps
    assert net.meta["covering_radius"] == pytest.approx(cover.max())
    for j in range(1, len(net)):
        assert np.all(d.eval_from_points(net.points[:j], net.points[j]) > eps)


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
def test_net_size_tracks_lattice_count(eps):
    net = generate_epsilon_net(quadratic(), (0, 0, 1, 1), NetParams(eps), probe_dims=(129, 129))
    lattice = (1.0 / eps) ** 2
    assert lattice / 4 <= len(net) <= 4 * lattice


def test_disk_probes_stay_in_the_inscribed_ellipse():
    net = generate_epsilon_net(quadratic(), (0.25, 0.375, 0.75, 0.625), NetParams(0.05), disk=True)
    u = (net.points[:, 0] - 0.5) / 0.25
    v = (net.points[:, 1] - 0.5) / 0.125
    assert np.all(u * u + v * v <= 1.0)


def test_sigma_surrogate_hand_values():
    assert sigma_surrogate(MetricField.from_function(lambda x, y: np.diag([2.0, 3.0]), (0, 0, 1, 1), (3, 3))) == 0.0
    # Q^(1/2) = diag(1 + x, 1): its difference quotient between nodes is diag(1, 0), norm 1
    mf = MetricField.from_function(lambda x, y: np.diag([(1 + x) ** 2, 1.0]), (0, 0, 1, 1), (3, 3))
    assert sigma_surrogate(mf) == pytest.approx(1.0, rel=1e-12)


def test_guarantee_flag():
    p = NetParams(0.1, 0.5)
    assert p.product == pytest.approx(0.05) and p.guaranteed
    assert not NetParams(0.1, 1.0).guaranteed
    with pytest.raises(InputError):
        generate_epsilon_net(quadratic(), (0, 0, 1, 1), NetParams(0.1, 1.0), require_guarantee=True)


def test_file_round_trip_is_exact(tmp_path):
    s = generate_random((0, 0, 1, 1), 17, 3)
    save_sites(s, tmp_path / "s.txt", "seed 3\ngenerator random")
    back = load_sites(tmp_path / "s.txt")
    assert np.array_equal(back.points, s.points)


def test_bad_site_file(tmp_path):
    (tmp_path / "s.txt").write_text("0 0\n1 2 3\n")
    with pytest.raises(InputError, match=":2"):
        load_sites(tmp_path / "s.txt")
