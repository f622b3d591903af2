import csv
from pathlib import Path
from typing import List, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.fuchsian import FundamentalOctagon, SurfaceGroup, surface_group
from pluriperiod.numerics.moebius import cayley_to_disk

logger = get_logger(__name__)


def disk_geodesic(p: complex, q: complex, samples: int = 64) -> np.ndarray:
    w = (q - p) / (1.0 - np.conj(p) * q)
    t = np.linspace(0.0, 1.0, samples) * w
    return (t + p) / (1.0 + np.conj(p) * t)


class ExportService:

    def __init__(self, genus: int = 2):
        self.genus = genus
        self.group: SurfaceGroup
        self.octagon: FundamentalOctagon
        self.group, self.octagon = surface_group(genus)

    def disk_vertices(self) -> List[complex]:
        return [complex(cayley_to_disk(v)) for v in self.octagon.vertices[:-1]]

    def write_svg(self, path: str) -> Path:
        out = Path(path)
        vertices = self.disk_vertices()

        fig, ax = plt.subplots(figsize=(6, 6))
        theta = np.linspace(0.0, 2.0 * np.pi, 361)
        ax.plot(np.cos(theta), np.sin(theta), color="black", linewidth=0.8)

        for edge, p in zip(self.octagon.edges, vertices):
            q = vertices[(edge.index + 1) % len(vertices)]
            arc = disk_geodesic(p, q)
            ax.plot(arc.real, arc.imag, color="tab:blue", linewidth=1.2)
            mid = arc[len(arc) // 2]
            ax.annotate(edge.label, (mid.real, mid.imag), fontsize=7, color="tab:blue", ha="center")

        for k, v in enumerate(vertices, start=1):
            ax.plot(v.real, v.imag, "o", color="tab:red", markersize=3)
            ax.annotate(f"tau_{k}", (v.real, v.imag), textcoords="offset points", xytext=(4, 4), fontsize=8)

        ax.set_aspect("equal")
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
        ax.axis("off")
        ax.set_title(f"Fundamental {4 * self.genus}-gon, genus {self.genus}")
        fig.savefig(out, format="svg")
        plt.close(fig)

        logger.info("wrote %s", out)
        return out

    def generator_rows(self) -> List[Tuple[str, str, str, str, str]]:
        return [
            (name, *(repr(float(x)) for x in g.entries()))
            for name, g in self.group.generators.items()
        ]

    def write_csv(self, path: str) -> Path:
        out = Path(path)
        with out.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["generator", "a", "b", "c", "d"])
            writer.writerows(self.generator_rows())
        logger.info("wrote %s", out)
        return out
