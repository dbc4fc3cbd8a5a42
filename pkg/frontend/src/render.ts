import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import * as echarts from "echarts";
import type { EChartsOption } from "echarts";

import { loadCsv } from "./csv.js";
import { contractionFit, mmsConvergence, normHistory, omegaDistance,
         rhoEnvelope } from "./figures.js";
import { CONTRACTION, ENVELOPE_FIT, MMS_CONVERGENCE, OMEGA_DISTANCE,
         SchemaError, TRAJECTORY } from "./schemas.js";

export const KINDS = ["norm-history", "rho-envelope", "contraction-fit",
                      "omega-distance", "mms-convergence"] as const;
export type Kind = (typeof KINDS)[number];

function buildOption(kind: Kind, inDir: string): EChartsOption {
  switch (kind) {
    case "norm-history":
      return normHistory(loadCsv(inDir, TRAJECTORY));
    case "rho-envelope":
      return rhoEnvelope(loadCsv(inDir, TRAJECTORY), loadCsv(inDir, ENVELOPE_FIT));
    case "contraction-fit":
      return contractionFit(loadCsv(inDir, CONTRACTION));
    case "omega-distance":
      return omegaDistance(loadCsv(inDir, OMEGA_DISTANCE));
    case "mms-convergence":
      return mmsConvergence(loadCsv(inDir, MMS_CONVERGENCE));
  }
}

/** Render one figure kind from inDir CSVs; returns the written SVG path. */
export function renderFigure(kind: Kind, inDir: string, outDir: string,
                             width = 860, height = 520): string {
  const option = buildOption(kind, inDir);
  const chart = echarts.init(null, null, {
    renderer: "svg", ssr: true, width, height,
  });
  try {
    chart.setOption(option);
    const svg = chart.renderToSVGString();
    mkdirSync(outDir, { recursive: true });
    const path = join(outDir, `${kind}.svg`);
    writeFileSync(path, svg);
    return path;
  } finally {
    chart.dispose();
  }
}

export { SchemaError };
