#!/usr/bin/env python3
"""Box hierarchy: core region, margin-starred partitions, and shift covers.

The multiscale decomposition runs on nested box partitions of the core
quarter of the grid. Children hugging their parent's boundary are dropped
(the starred rule), which thins each level by at most 4x; composing the
per-level lattice shifts restores full coverage of the core.
"""

from levelsim.gff import (
    core_region,
    counting_check,
    nested_partitions,
    shift_cover,
    uniform_schedule,
)


def main() -> None:
    grid_n = 64
    core = core_region(grid_n)
    print(f"core region of the {grid_n} grid: {core} (side {core.side})\n")

    for levels in (1, 2):
        schedule = uniform_schedule(grid_n, levels=levels)
        parts = nested_partitions(grid_n, schedule)
        print(f"schedule exponents {schedule.exponents}:")
        print(f"  boxes per level: {[len(lvl) for lvl in parts.levels]}")
        print(f"  margin rule holds: {parts.margin_ok()}")

        starred, flat, ok = counting_check(parts)
        print(f"  counting: {starred} starred vs {flat} flat, "
              f"{starred} * 4^{levels} >= {flat}: {ok}")

        cover = shift_cover(parts)
        print(f"  cover: {len(cover.shifts)} composed shifts, "
              f"max magnitude {cover.max_shift}, verified={cover.verified}")
        print(f"  shifts: {list(cover.shifts)}\n")


if __name__ == "__main__":
    main()
