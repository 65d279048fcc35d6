import pytest

from dmres import (
    ElementIndex,
    InvalidElementError,
    all_offdiagonal_elements,
    completely_offdiagonal_elements,
    element_from_flat,
    precision_element_set,
)


def test_coupled_set_and_size():
    e = ElementIndex.create((2, 3, 2), (0, 1, 1), (0, 2, 0))
    assert e.coupled_set == (1, 2)
    assert e.n_couplings == 2
    assert not e.is_diagonal


def test_flat_indices_row_major():
    e = ElementIndex.create((2, 2), (0, 1), (1, 0))
    assert e.s_flat == 1
    assert e.s_prime_flat == 2
    assert element_from_flat((2, 2), 1, 2) == e


def test_conjugate_swaps_indices():
    e = ElementIndex.create((3,), (0,), (2,))
    assert e.conjugate() == ElementIndex.create((3,), (2,), (0,))


def test_out_of_range_rejected():
    with pytest.raises(InvalidElementError):
        ElementIndex.create((2,), (2,), (0,))


def test_length_mismatch_rejected():
    with pytest.raises(InvalidElementError):
        ElementIndex.create((2, 2), (0,), (1, 1))


def test_offdiagonal_counts():
    assert len(all_offdiagonal_elements((3,))) == 3
    assert len(all_offdiagonal_elements((3,), ordered=True)) == 6
    assert len(all_offdiagonal_elements((2, 2))) == 6
    assert len(completely_offdiagonal_elements((2, 2))) == 2
    assert len(completely_offdiagonal_elements((3, 3))) == 18


def test_precision_sets():
    assert len(precision_element_set(1, 4)) == 6
    labels = {e.label() for e in precision_element_set(2, 2)}
    assert labels == {"00,11", "01,10"}
