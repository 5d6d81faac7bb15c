import numpy as np
import pytest

from catbreak.categorical import (
    ABSENT,
    Edit,
    EditKind,
    EmbeddingTable,
    Instance,
    Perturbation,
    RelaxedIndicators,
    admissible_values,
    apply_perturbation,
    diff,
    edit_for,
    inverse,
    perturbation_between,
    slot_mask,
    stack_tensor,
)
from catbreak.errors import CatbreakError


def make_table():
    return EmbeddingTable.from_rows(
        [
            [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            [[2.0, 2.0], [-1.0, 0.5]],
        ]
    )


def test_slot_mask_marks_existing_values():
    mask = slot_mask((3, 1))
    assert mask.tolist() == [[True, True, True], [True, False, False]]


def test_embedding_table_pads_ragged_rows():
    table = make_table()
    assert table.values_per_feature == (3, 2)
    assert table.vectors.shape == (2, 3, 2)
    assert table.vectors[1, 2].tolist() == [0.0, 0.0]
    assert table.dim == 2


def test_embedding_table_rejects_mixed_dims():
    with pytest.raises(CatbreakError, match="SHAPE_MISMATCH"):
        EmbeddingTable.from_rows([[[1.0], [1.0, 2.0]]])


def test_embedding_table_rejects_non_finite():
    vectors = np.zeros((1, 2, 2))
    vectors[0, 0, 0] = np.nan
    with pytest.raises(CatbreakError, match="NON_FINITE"):
        EmbeddingTable((2,), vectors)


def test_instance_indicators_leave_absent_rows_empty():
    inst = Instance((2, ABSENT), label=1)
    b = inst.indicators((3, 2))
    assert b.tolist() == [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]
    assert inst.codes().tolist() == [2, -1]


def test_instance_rejects_value_out_of_range():
    with pytest.raises(CatbreakError, match="outside"):
        Instance((3, 0)).indicators((3, 2))


def test_stack_tensor_scales_embeddings_by_indicators():
    table = make_table()
    x = stack_tensor(Instance((1, 0)), table)
    assert x.shape == (2, 3, 2)
    assert x[0, 1].tolist() == [0.0, 1.0]
    assert x[1, 0].tolist() == [2.0, 2.0]
    assert np.count_nonzero(x[0, [0, 2]]) == 0


def test_stack_tensor_is_linear_in_relaxed_indicators():
    table = make_table()
    relaxed = RelaxedIndicators(
        np.array([[0.5, 0.5, 0.0], [0.25, 0.0, 0.0]]), table.values_per_feature
    )
    x = stack_tensor(relaxed, table)
    assert x[0, 0].tolist() == pytest.approx([0.5, 0.0])
    assert x[1, 0].tolist() == pytest.approx([0.5, 0.5])


def test_relaxed_indicators_reject_mass_on_padding():
    with pytest.raises(CatbreakError, match="nonexistent"):
        RelaxedIndicators(np.array([[1.0, 0.0], [0.0, 1.0]]), (2, 1))


def test_edit_for_picks_kind_from_current_value():
    inst = Instance((1, ABSENT))
    assert edit_for(inst, 0, 2) == Edit(0, EditKind.SUBSTITUTE, 2)
    assert edit_for(inst, 1, 0) == Edit(1, EditKind.INSERT, 0)
    assert edit_for(inst, 0, None) == Edit(0, EditKind.DELETE)


def test_apply_perturbation_returns_new_instance():
    inst = Instance((1, ABSENT, 0), label=1)
    p = Perturbation.of([Edit(2, EditKind.DELETE), Edit(1, EditKind.INSERT, 1)])
    out = apply_perturbation(inst, p)
    assert out.categories == (1, 1, None)
    assert out.label == 1
    assert inst.categories == (1, None, 0)
    assert diff(inst, out) == frozenset({1, 2})


@pytest.mark.parametrize(
    "edit",
    [
        Edit(0, EditKind.INSERT, 1),
        Edit(1, EditKind.DELETE),
        Edit(0, EditKind.SUBSTITUTE, 1),
        Edit(1, EditKind.SUBSTITUTE, 0),
        Edit(5, EditKind.DELETE),
    ],
)
def test_apply_perturbation_rejects_invalid_edits(edit):
    with pytest.raises(CatbreakError, match="INVALID_EDIT"):
        apply_perturbation(Instance((1, ABSENT)), Perturbation.of([edit]))


def test_perturbation_rejects_repeated_feature():
    with pytest.raises(CatbreakError, match="DUPLICATE_FEATURE"):
        Perturbation.of([Edit(0, EditKind.DELETE), Edit(0, EditKind.SUBSTITUTE, 2)])


def test_diff_rejects_length_mismatch():
    with pytest.raises(CatbreakError, match="SHAPE_MISMATCH"):
        diff(Instance((0,)), Instance((0, 1)))


def test_inverse_restores_the_original():
    inst = Instance((0, ABSENT, 2))
    p = Perturbation.of([Edit(0, EditKind.SUBSTITUTE, 1), Edit(1, EditKind.INSERT, 0)])
    perturbed = apply_perturbation(inst, p)
    assert apply_perturbation(perturbed, inverse(p, inst)) == inst
    assert perturbation_between(inst, perturbed) == p


def test_apply_and_diff_round_trip_on_random_perturbations():
    rng = np.random.default_rng(8)
    counts = (3, 2, 4, 3, 2, 5)
    for _ in range(200):
        inst = Instance(tuple(
            ABSENT if rng.random() < 0.25 else int(rng.integers(m)) for m in counts
        ))
        size = int(rng.integers(len(counts) + 1))
        features = sorted(int(f) for f in rng.choice(len(counts), size=size, replace=False))
        edits = []
        for feature in features:
            values = admissible_values(inst, feature, counts, allow_delete=True)
            edits.append(edit_for(inst, feature, values[int(rng.integers(len(values)))]))
        p = Perturbation.of(edits)
        perturbed = apply_perturbation(inst, p)
        assert diff(inst, perturbed) == frozenset(features)
        assert perturbation_between(inst, perturbed) == p
        assert apply_perturbation(perturbed, inverse(p, inst)) == inst
        assert inst.categories == apply_perturbation(inst, Perturbation()).categories


def test_admissible_values_exclude_current_and_optionally_delete():
    inst = Instance((1, ABSENT))
    assert admissible_values(inst, 0, (3, 2)) == (0, 2)
    assert admissible_values(inst, 0, (3, 2), allow_delete=True) == (0, 2, None)
    assert admissible_values(inst, 1, (3, 2), allow_delete=True) == (0, 1)
    assert admissible_values(Instance((0,)), 0, (1,)) == ()
