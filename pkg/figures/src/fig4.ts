import * as fs from "node:fs";
import { runMain } from "./cli";
import { loadRows, groupBy, mean, SchemaError } from "./csv";
import { PALETTE, renderChart, Series } from "./chart";
import { Marker } from "./raster";

const MARKERS: Marker[] = ["square", "diamond", "circle", "cross"];

/** Overall hit rate vs capacity, one series per policy (seeds averaged). */
export function render(csvPath: string, outPath: string): void {
  const rows = loadRows(csvPath).filter((r) => r.kind === "aggregate" && r.hit_rate !== null);
  if (rows.length === 0) {
    throw new SchemaError("no aggregate rows to plot");
  }
  const series: Series[] = [];
  let i = 0;
  for (const [policy, cell] of groupBy(rows, (r) => r.policy)) {
    const points: Array<[number, number]> = [];
    for (const [, atB] of groupBy(cell, (r) => String(r.B))) {
      points.push([atB[0].B, mean(atB.map((r) => r.hit_rate as number))]);
    }
    const model = policy.endsWith("-approx");
    series.push({
      label: policy,
      color: PALETTE[i % PALETTE.length],
      points,
      line: true,
      dash: model ? [5, 3] : undefined,
      marker: model ? undefined : MARKERS[i % MARKERS.length],
    });
    i++;
  }
  const raster = renderChart({
    id: "policy comparison",
    xLabel: "cache capacity B",
    yLabel: "hit rate",
    series,
    yDomain: [0, 1],
  });
  fs.writeFileSync(outPath, raster.toPNG());
}

export function main(args: string[]): never {
  return runMain(render, "fig4", args);
}

if (require.main === module) {
  main(process.argv.slice(2));
}
