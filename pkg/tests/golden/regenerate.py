"""Rebuild the golden images from the analytic grids (not from a simulator run)."""
from pathlib import Path

from qbench import render
from qbench.bench import riemann

HERE = Path(__file__).resolve().parent


def main():
    ps, p1 = riemann.oracle_grids("microscope", 2, 32)
    (HERE / "sm_n2_ps.pgm").write_bytes(render.pgm_bytes(render.grid_image(ps)))
    (HERE / "sm_n2_p1.pgm").write_bytes(render.pgm_bytes(render.grid_image(p1)))


if __name__ == "__main__":
    main()
