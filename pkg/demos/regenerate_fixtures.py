#!/usr/bin/env python3
"""Rebuild the benchmark input files under fixtures/.

Every mesh, geometry and problem file consumed by the CLI and the test
suite is produced here from the builders in splinecomplex.benchmarks, so
the shipped fixtures stay reproducible.
"""

from pathlib import Path

from splinecomplex import benchmarks as bm
from splinecomplex.multipatch import Interface
from splinecomplex.serialization import dump_json, geometry_to_dict, patchset_to_dict, tmesh_to_dict

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def main():
    OUT.mkdir(exist_ok=True)

    for level in (0, 1, 2, 3):
        dump_json(tmesh_to_dict(bm.square_raw_tmesh(level)), OUT / f"square_tmesh_l{level}.json")
    dump_json(tmesh_to_dict(bm.fig_local_kv_raw()), OUT / "fig_local_kv.json")
    dump_json(tmesh_to_dict(bm.fig_extensions_raw()), OUT / "fig_extensions.json")
    dump_json(tmesh_to_dict(bm.crossing_extensions_raw()), OUT / "crossing_extensions.json")
    dump_json(tmesh_to_dict(bm.two_t_raw()), OUT / "two_t.json")
    for level in (0, 1, 2):
        dump_json(
            tmesh_to_dict(bm.lsection_raw_tmesh(level, 4)), OUT / f"lsection_tmesh_p4_l{level}.json"
        )
        dump_json(
            tmesh_to_dict(bm.cylinder_section_raw_tmesh(level)),
            OUT / f"cylinder_section_l{level}.json",
        )

    dump_json(geometry_to_dict(bm.square_geometry()), OUT / "square_geometry.json")
    itf_l = [Interface((0, (1, 0)), (1, (0, 0))), Interface((1, (1, 0)), (2, (0, 0)))]
    dump_json(patchset_to_dict(bm.lsection_patches(), itf_l), OUT / "lsection_patches.json")
    itf_c = [Interface((0, (1, 1)), (1, (1, 0))), Interface((1, (1, 1)), (2, (1, 0)))]
    dump_json(patchset_to_dict(bm.cylinder_sector_patches(), itf_c), OUT / "cylinder_patches.json")
    itf_g = [Interface((0, (2, 1)), (1, (2, 0)))]
    dump_json(patchset_to_dict(bm.waveguide_geometry(), itf_g), OUT / "guide_patches.json")

    dump_json(
        {
            "kind": "solve-eig",
            "formulation": "rotrot2d",
            "benchmark": "square",
            "degree": 3,
            "level": 0,
            "mesh": "square_tmesh_l0.json",
            "geometry": "square_geometry.json",
            "bc": "all",
            "eigencount": 52,
        },
        OUT / "square_p3.json",
    )
    dump_json(
        {
            "kind": "solve-eig",
            "formulation": "curlcurl3d",
            "benchmark": "thick-l",
            "degree": 4,
            "level": 0,
            "nz": 2,
            "mesh": "lsection_tmesh_p4_l0.json",
            "multipatch": "lsection_patches.json",
            "eigencount": 5,
        },
        OUT / "thickL_p4.json",
    )
    dump_json(
        {
            "kind": "solve-eig",
            "formulation": "laplace2d",
            "benchmark": "lsection",
            "degree": 4,
            "level": 2,
            "mesh": "lsection_tmesh_p4_l2.json",
            "multipatch": "lsection_patches.json",
            "eigencount": 5,
        },
        OUT / "lsection_p4.json",
    )
    dump_json(
        {
            "kind": "solve-source",
            "formulation": "curlcurl3d",
            "benchmark": "cylinder-sector",
            "degree": 3,
            "level": 1,
            "mesh": "cylinder_section_l1.json",
            "multipatch": "cylinder_patches.json",
        },
        OUT / "cyl_sector_p3.json",
    )
    dump_json(
        {
            "kind": "solve-waveguide",
            "benchmark": "straight-guide",
            "degree": 2,
            "n_section": 3,
            "nz": 2,
            "k": 1.2,
            "length": 1.0,
            "multipatch": "guide_patches.json",
        },
        OUT / "straight_guide.json",
    )
    dump_json(
        {
            "kind": "convergence",
            "benchmark": "lsection",
            "degree": 4,
            "levels": [0, 1, 2],
        },
        OUT / "lsection_convergence.json",
    )
    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
