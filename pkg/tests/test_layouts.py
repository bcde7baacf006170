import numpy as np
import pytest

from coopkitchen.core.layout import (
    CANONICAL_LAYOUT_NAMES,
    bundled_layout_meta,
    canonical_layouts,
    load_bundled_layout,
    load_layout_file,
    load_modified_layout,
    parse_layout,
    render_layout,
    save_layout_file,
    swap_tiles,
    validate_layout,
)
from coopkitchen.core.types import (
    BadStarts,
    InvalidSwap,
    MalformedGrid,
    MissingFeature,
    OpenBoundary,
    TileKind,
)


class TestParsing:
    def test_round_trip(self, layouts):
        for layout in layouts.values():
            again = parse_layout(render_layout(layout), name=layout.name)
            assert (again.tiles == layout.tiles).all()
            assert again.starts == layout.starts

    def test_ragged_grid_rejected(self):
        with pytest.raises(MalformedGrid):
            parse_layout("XXX\nXX", name="ragged")

    def test_unknown_symbol_rejected(self):
        with pytest.raises(MalformedGrid):
            parse_layout("XXX\nX?X\nXXX", name="bad")

    def test_missing_feature_rejected(self):
        with pytest.raises(MissingFeature):
            parse_layout("XXXX\nX12X\nXXXX", name="nofeat")

    def test_missing_start_rejected(self):
        with pytest.raises(BadStarts):
            parse_layout("XODPS\nX1  X\nXXXXX", name="onestart")

    def test_open_boundary_rejected(self):
        with pytest.raises(OpenBoundary):
            parse_layout("XODPS\nX1 2 \nXXXXX", name="leaky")


class TestBundled:
    def test_all_canonical_layouts_load_and_validate(self):
        loaded = canonical_layouts()
        assert set(loaded) == set(CANONICAL_LAYOUT_NAMES)
        assert len(loaded) == 5
        for layout in loaded.values():
            validate_layout(layout)

    def test_every_layout_has_a_perturbation_manifest(self):
        for name in CANONICAL_LAYOUT_NAMES:
            meta = bundled_layout_meta(name)
            swap = meta["perturbation"]["swap"]
            assert len(swap) == 2

    def test_modified_variants_are_valid_swaps(self):
        for name in CANONICAL_LAYOUT_NAMES:
            modified = load_modified_layout(name)
            validate_layout(modified)
            original = load_bundled_layout(name)
            assert (modified.tiles != original.tiles).sum() in (0, 2)


class TestSwap:
    def test_identity_swap_of_equal_kinds(self, cramped):
        # two counter cells: swapping them changes nothing
        counters = cramped.cells_of(TileKind.COUNTER)
        out = swap_tiles(cramped, counters[0], counters[1])
        assert (out.tiles == cramped.tiles).all()

    def test_same_cell_rejected(self, cramped):
        with pytest.raises(InvalidSwap):
            swap_tiles(cramped, (0, 0), (0, 0))

    def test_out_of_bounds_rejected(self, cramped):
        with pytest.raises(InvalidSwap):
            swap_tiles(cramped, (0, 0), (99, 99))

    def test_start_cell_rejected(self, cramped):
        with pytest.raises(InvalidSwap):
            swap_tiles(cramped, cramped.starts[0], (0, 0))

    def test_walling_off_a_feature_rejected(self):
        # a pocket layout where the only floor beside the window can be
        # swapped away, stranding it
        grid = "XXODPX\nX1  2X\nXXXX S\nXXXXXX"
        layout = parse_layout(grid, name="pocket")
        with pytest.raises(InvalidSwap):
            # swap the window's only adjacent floor (2,4) with a far counter
            swap_tiles(layout, (2, 4), (3, 0))


class TestFiles:
    def test_save_and_load_with_meta(self, cramped, tmp_path):
        meta = {"perturbation": {"swap": [[0, 1], [0, 2]]}}
        path = save_layout_file(cramped, tmp_path, meta=meta)
        loaded = load_layout_file(path)
        assert (loaded.tiles == cramped.tiles).all()
        assert loaded.starts == cramped.starts
