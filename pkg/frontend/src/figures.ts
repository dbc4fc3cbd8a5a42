/**
 * Figure builders: validated CSV rows in, echarts option out. No numerics
 * beyond grouping and evaluating curves whose coefficients the simulation
 * already fitted and wrote next to the data.
 */

import type { EChartsOption, SeriesOption } from "echarts";

import { Row } from "./schemas.js";

const PALETTE = ["#2f6fab", "#c0392b", "#27845f", "#8e44ad", "#b7792c",
                 "#16727c", "#99396f", "#5d6d3e"];

function groupBy<T extends Row>(rows: T[], key: string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const row of rows) {
    const tag = String(row[key]);
    if (!out.has(tag)) out.set(tag, []);
    out.get(tag)!.push(row);
  }
  return out;
}

function base(title: string, xName: string, yName: string,
              logY = false): EChartsOption {
  return {
    backgroundColor: "#ffffff",
    animation: false,
    title: { text: title, left: "center", textStyle: { fontSize: 14 } },
    grid: { left: 70, right: 30, top: 50, bottom: 55 },
    legend: { bottom: 0, type: "scroll" },
    xAxis: { type: "value", name: xName, nameLocation: "middle", nameGap: 28 },
    yAxis: {
      type: logY ? "log" : "value",
      name: yName,
      nameLocation: "middle",
      nameGap: 50,
    },
    series: [],
  };
}

/** Per-run sup and L2 norm history from trajectory.csv. */
export function normHistory(trajectory: Row[]): EChartsOption {
  const runs = groupBy(trajectory, "run_id");
  const positive = trajectory.every(
    (r) => (r.linf as number) > 0 && (r.l2 as number) > 0);
  const option = base("norm history", "time", "norm",
                      positive && runs.size > 0);
  const series: SeriesOption[] = [];
  let k = 0;
  for (const [run, rows] of runs) {
    const color = PALETTE[k % PALETTE.length];
    series.push({
      name: `run ${run} sup`,
      type: "line",
      showSymbol: false,
      lineStyle: { color },
      itemStyle: { color },
      data: rows.map((r) => [r.time as number, r.linf as number]),
    });
    series.push({
      name: `run ${run} L2`,
      type: "line",
      showSymbol: false,
      lineStyle: { color, type: "dashed" },
      itemStyle: { color },
      data: rows.map((r) => [r.time as number, r.l2 as number]),
    });
    k += 1;
  }
  option.series = series;
  return option;
}

/** Running sup over runs against the fitted A + B s^(-1/(m-2)) envelope. */
export function rhoEnvelope(trajectory: Row[], fit: Row[]): EChartsOption {
  const option = base("amplitude envelope", "time", "sup norm", false);
  const series: SeriesOption[] = [];
  const runs = groupBy(trajectory, "run_id");
  let k = 0;
  for (const [run, rows] of runs) {
    series.push({
      name: `run ${run}`,
      type: "line",
      showSymbol: false,
      lineStyle: { color: PALETTE[k % PALETTE.length], width: 1 },
      itemStyle: { color: PALETTE[k % PALETTE.length] },
      data: rows.map((r) => [r.time as number, r.linf as number]),
    });
    k += 1;
  }
  if (fit.length > 0 && trajectory.length > 0) {
    const { m, transient, coeff_const, coeff_tail } = fit[0] as {
      m: number; transient: number; coeff_const: number; coeff_tail: number;
    };
    const times = [...new Set(trajectory.map((r) => r.time as number))]
      .filter((t) => t >= transient)
      .sort((a, b) => a - b);
    series.push({
      name: `fit A + B s^(-1/${m - 2})`,
      type: "line",
      showSymbol: false,
      lineStyle: { color: "#222222", width: 2, type: "dotted" },
      itemStyle: { color: "#222222" },
      data: times.map((t) => [
        t, coeff_const + coeff_tail * Math.pow(t, -1 / (m - 2)),
      ]),
    });
  }
  option.series = series;
  return option;
}

/** log10 of the pair distance with the fitted exponential bound. */
export function contractionFit(rows: Row[]): EChartsOption {
  const option = base("contraction of pair distance", "time",
                      "log10 distance", false);
  const floor = 1e-300;
  const pts = rows.map((r) => [
    r.time as number, Math.log10(Math.max(r.distance as number, floor)),
  ]);
  const bound = rows.map((r) => [
    r.time as number, Math.log10(Math.max(r.bound as number, floor)),
  ]);
  const kHat = rows.length > 0 ? (rows[0].k_hat as number) : NaN;
  option.series = [
    {
      name: "distance",
      type: "scatter",
      symbolSize: 7,
      itemStyle: { color: PALETTE[0] },
      data: pts,
    },
    {
      name: `bound, rate ${kHat.toPrecision(4)}`,
      type: "line",
      showSymbol: false,
      lineStyle: { color: PALETTE[1], width: 2 },
      itemStyle: { color: PALETTE[1] },
      data: bound,
    },
  ];
  return option;
}

/** Late-time semidistances in both directions against the initial one. */
export function omegaDistance(rows: Row[]): EChartsOption {
  const labels = rows.map((r) => String(r.direction));
  const late = rows.map((r) => r.semidistance as number);
  const initial = rows.length > 0 ? (rows[0].initial_semidistance as number) : 0;
  const positive = late.every((v) => v > 0) && initial > 0;
  const option: EChartsOption = {
    backgroundColor: "#ffffff",
    animation: false,
    title: { text: "limit-set semidistance", left: "center",
             textStyle: { fontSize: 14 } },
    grid: { left: 80, right: 30, top: 50, bottom: 55 },
    legend: { bottom: 0 },
    xAxis: { type: "category", data: [...labels, "initial sets"] },
    yAxis: { type: positive ? "log" : "value", name: "semidistance",
             nameLocation: "middle", nameGap: 60 },
    series: [{
      name: "sup-inf distance",
      type: "bar",
      barWidth: "50%",
      itemStyle: { color: PALETTE[0] },
      data: [...late, { value: initial, itemStyle: { color: PALETTE[1] } }],
    }],
  };
  return option;
}

/** log-log error decay for the dt and h sweeps with fitted orders. */
export function mmsConvergence(rows: Row[]): EChartsOption {
  const option = base("manufactured-solution convergence",
                      "log10 step (dt or h)", "log10 L2 error", false);
  const series: SeriesOption[] = [];
  const byAxis = groupBy(rows, "axis");
  let k = 0;
  for (const [axis, group] of byAxis) {
    const order = group[0].fitted_order as number;
    series.push({
      name: `${axis} sweep, order ${order.toFixed(2)}`,
      type: "line",
      symbolSize: 8,
      lineStyle: { color: PALETTE[k % PALETTE.length] },
      itemStyle: { color: PALETTE[k % PALETTE.length] },
      data: group.map((r) => [
        Math.log10(r[axis === "dt" ? "dt" : "h"] as number),
        Math.log10(r.l2_error as number),
      ]),
    });
    k += 1;
  }
  option.series = series;
  return option;
}
