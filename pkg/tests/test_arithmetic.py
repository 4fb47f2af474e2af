import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sievekit.arithmetic import (
    H_sum,
    V_product,
    arithmetic_tables,
    build_system,
    discriminant,
    f_values,
    factorize,
    from_offsets,
    is_admissible,
    is_prime,
    omega_L,
    parse_tuple_spec,
    rho,
    _roots_mod_prime,
    _rho_prime,
)
from sievekit.errors import GcdViolation, LimitTooLarge, ZeroDiscriminant, ZeroValue


def brute_rho(L, d):
    return sum(1 for n in range(d) if L.value(n) % d == 0)


class TestBuildSystem:
    def test_basic(self):
        L = build_system([[1, 0], [1, 2]])
        assert L.kappa == 2
        assert L.delta == 2

    def test_repeated_form_rejected(self):
        with pytest.raises(ZeroDiscriminant):
            build_system([[1, 0], [1, 0]])

    def test_zero_coefficient_rejected(self):
        with pytest.raises(ZeroDiscriminant):
            build_system([[0, 1]])

    def test_gcd_violation(self):
        with pytest.raises(GcdViolation):
            build_system([[2, 4]])

    def test_empty(self):
        with pytest.raises(ValueError):
            build_system([])


class TestDiscriminant:
    @pytest.mark.parametrize("forms,expected", [
        ([[1, 0], [1, 2]], 2),
        ([[1, 0], [2, 1]], 2),
        ([[1, 0]], 1),
        ([[1, 0], [1, 2], [1, 6]], 2 * 6 * 4),
    ])
    def test_values(self, forms, expected):
        assert discriminant(build_system(forms)) == expected


class TestRho:
    def test_twin_small(self, twin):
        assert rho(twin, 2) == 1
        assert rho(twin, 15) == 4  # rho(3)*rho(5) = 2*2

    def test_unit(self, twin):
        assert rho(twin, 1) == 1

    def test_scan_vs_roots_paths(self, twin):
        # residue scan (used below 50) against the root-solving path
        for p in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                  53, 59, 61, 67, 71, 97, 101]:
            assert _rho_prime(twin, p) == brute_rho(twin, p)
            assert len(_roots_mod_prime(twin, p)) == brute_rho(twin, p)

    def test_rho_equals_kappa_off_discriminant(self, tables_10k):
        for offs in ([0, 2], [0, 2, 6], [0, 4, 6, 10]):
            L = from_offsets(offs)
            for p in tables_10k.primes[tables_10k.primes < 1000]:
                p = int(p)
                if p > L.kappa and L.delta % p != 0:
                    assert _rho_prime(L, p) == L.kappa

    def test_non_squarefree_direct_count(self, twin):
        # documented extension: direct root count mod d
        assert rho(twin, 4) == brute_rho(twin, 4)
        assert rho(twin, 9) == brute_rho(twin, 9)

    def test_nagel_square_bound(self):
        L = from_offsets([0, 2, 6])
        for p in (2, 3, 5, 7, 11, 13):
            assert rho(L, p * p) <= L.kappa * L.delta ** 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([2, 3, 5, 7, 11, 13, 17, 19, 23]),
                min_size=1, max_size=4, unique=True),
       st.lists(st.sampled_from([29, 31, 37, 41, 43]),
                min_size=1, max_size=2, unique=True))
def test_rho_multiplicative(ps, qs):
    L = from_offsets([0, 2])
    d1 = math.prod(ps)
    d2 = math.prod(qs)
    assert rho(L, d1) * rho(L, d2) == rho(L, d1 * d2)
    assert rho(L, d1 * d2) == brute_rho(L, d1 * d2)


class TestAdmissibility:
    def test_three_consecutive_evens_fails_at_3(self):
        rep = is_admissible(from_offsets([0, 2, 4]))
        assert not rep.admissible
        assert rep.failing_prime == 3

    def test_admissible_triple(self):
        rep = is_admissible(from_offsets([0, 2, 6]))
        assert rep.admissible
        assert rep.extended_ok

    def test_single_form(self):
        rep = is_admissible(from_offsets([0]))
        assert rep.admissible
        assert rep.failing_prime is None


class TestFValues:
    def test_twin_at_3(self, twin):
        f, fp = f_values(twin, 3)
        assert f == Fraction(3, 2)
        assert fp == Fraction(1, 2)

    def test_single_form_at_6(self, tuple_n):
        f, fp = f_values(tuple_n, 6)
        assert f == 6
        assert fp == 2

    def test_unit(self, twin):
        assert f_values(twin, 1) == (1, 1)

    def test_roundtrip_f_times_rho(self, twin):
        for d in (2, 3, 5, 6, 15, 30, 105):
            f, _ = f_values(twin, d)
            assert f * rho(twin, d) == d


class TestVProduct:
    def test_twin_at_5(self, twin):
        assert V_product(twin, 5, exact=True) == Fraction(1, 6)

    def test_single_at_3(self, tuple_n):
        assert V_product(tuple_n, 3, exact=True) == Fraction(1, 2)

    def test_empty_product(self, twin):
        assert V_product(twin, 2) == 1.0

    def test_zero_factor_raised(self):
        from sievekit.errors import ZeroFactor
        L = from_offsets([0, 2, 4])  # rho(3) = 3
        with pytest.raises(ZeroFactor):
            V_product(L, 5)

    def test_log_power_bound(self, tables_10k):
        # calibrated once: max of 1/(V log^k z) stays below 3 on the grid
        for offs in ([0], [0, 2], [0, 2, 6]):
            L = from_offsets(offs)
            for z in (10, 100, 1000, 10_000):
                v = V_product(L, z, tables=tables_10k)
                assert 1.0 / v <= 3.0 * math.log(z) ** L.kappa


class TestHSum:
    def test_single_form_at_10(self, tuple_n):
        val, _ = H_sum(tuple_n, 10)
        expect = sum(math.log(p) / p for p in (2, 3, 5, 7))
        assert val == pytest.approx(expect, abs=1e-12)
        assert val == pytest.approx(1.3127, abs=5e-4)

    def test_empty(self, tuple_n):
        assert H_sum(tuple_n, 2) == (0.0, pytest.approx(-math.log(2)))

    def test_twin_residual_bounded(self, twin, tables_10k):
        val, res = H_sum(twin, 1000, tables=tables_10k)
        assert abs(res) < 4.0
        assert res == pytest.approx(-2.9431, abs=1e-3)


class TestOmegaL:
    def test_examples(self, twin, tuple_n):
        assert omega_L(twin, 3) == 2          # 3*5
        assert omega_L(twin, 7) == 3          # 7*9 = 7*3^2
        assert omega_L(tuple_n, 1) == 0

    def test_zero_value(self):
        L = build_system([[1, -3]])
        with pytest.raises(ZeroValue):
            omega_L(L, 3)

    def test_against_naive(self, twin, tables_10k):
        def naive(m):
            c = 0
            d = 2
            while d * d <= m:
                while m % d == 0:
                    c += 1
                    m //= d
                d += 1
            return c + (1 if m > 1 else 0)
        for n in range(1, 400):
            assert omega_L(twin, n, tables=tables_10k) == naive(n) + naive(n + 2)


class TestTables:
    def test_hand_table(self):
        t = arithmetic_tables(10)
        assert list(t.primes) == [2, 3, 5, 7]
        assert t.mu(6) == 1
        assert t.mu(4) == 0

    def test_minimal(self):
        assert list(arithmetic_tables(2).primes) == [2]

    def test_lpf_and_nu(self):
        t = arithmetic_tables(30)
        assert t.least_prime_factor[30] == 2
        assert t.nu(30) == 3

    def test_invariants(self, tables_10k):
        t = tables_10k
        for p in (2, 97, 9973):
            assert t.least_prime_factor[p] == p
        # mu(d) = 0 iff a square divides d
        for d in range(2, 500):
            sqfree = all(e == 1 for _, e in factorize(d))
            assert (t.mu(d) != 0) == sqfree

    def test_cap(self):
        with pytest.raises(LimitTooLarge):
            arithmetic_tables(10 ** 12)


class TestPrimality:
    def test_small(self):
        assert [n for n in range(2, 30) if is_prime(n)] == \
            [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]

    def test_large(self):
        assert is_prime(2 ** 61 - 1)
        assert not is_prime(2 ** 61 + 1)

    def test_factorize_roundtrip(self):
        for n in (2 * 3 * 5 * 7, 97 * 101, 2 ** 10, 999_999_999_989):
            assert math.prod(p ** e for p, e in factorize(n)) == n


class TestTupleSpec:
    def test_shorthand(self):
        L = parse_tuple_spec("0,2,6")
        assert L.forms == ((1, 0), (1, 2), (1, 6))

    def test_inline_json(self):
        L = parse_tuple_spec('{"forms": [[1, 0], [2, 1]]}')
        assert L.delta == 2

    def test_file(self, tmp_path):
        path = tmp_path / "tuple.json"
        path.write_text('{"forms": [[1, 0], [1, 4]]}')
        assert parse_tuple_spec(str(path)).kappa == 2
