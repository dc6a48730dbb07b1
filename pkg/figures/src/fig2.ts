import * as fs from "node:fs";
import { runMain } from "./cli";
import { loadRows, groupBy, SchemaError } from "./csv";
import { PALETTE, renderChart, Series } from "./chart";

// One dash pattern per layer; layer 1 is solid.
const DASHES: Array<[number, number] | undefined> = [undefined, [6, 3], [3, 3], [1, 3]];

/** Per-layer hit probability vs capacity: model lines, simulated squares. */
export function render(csvPath: string, outPath: string): void {
  const rows = loadRows(csvPath).filter(
    (r) => r.kind === "layer" && r.d !== null && r.v_or_l !== null && r.hit_prob !== null,
  );
  if (rows.length === 0) {
    throw new SchemaError("no layer rows to plot");
  }
  const objects = [...new Set(rows.map((r) => r.d as number))].sort((a, b) => a - b);
  const layers = [...new Set(rows.map((r) => r.v_or_l as number))].sort((a, b) => a - b);
  const cells = groupBy(
    rows,
    (r) => `${r.policy.endsWith("-approx") ? "model" : "sim"}|${r.d}|${r.v_or_l}`,
  );
  const series: Series[] = [];
  for (const d of objects) {
    const color = PALETTE[objects.indexOf(d) % PALETTE.length];
    for (const l of layers) {
      const model = cells.get(`model|${d}|${l}`);
      if (model) {
        series.push({
          label: `d=${d} l=${l}`,
          color,
          points: model.map((r) => [r.B, r.hit_prob as number]),
          line: true,
          dash: DASHES[(l - 1) % DASHES.length],
        });
      }
      const sim = cells.get(`sim|${d}|${l}`);
      if (sim) {
        series.push({
          label: "",
          color,
          points: sim.map((r) => [r.B, r.hit_prob as number]),
          line: false,
          marker: "square",
        });
      }
    }
  }
  series.push(
    { label: "lines: model", color: [120, 120, 120], points: [], line: true },
    { label: "squares: simulated", color: [120, 120, 120], points: [], line: false, marker: "square" },
  );
  const raster = renderChart({
    id: "layer hit probability",
    xLabel: "cache capacity B",
    yLabel: "hit probability",
    series,
    yDomain: [0, 1],
  });
  fs.writeFileSync(outPath, raster.toPNG());
}

export function main(args: string[]): never {
  return runMain(render, "fig2", args);
}

if (require.main === module) {
  main(process.argv.slice(2));
}
