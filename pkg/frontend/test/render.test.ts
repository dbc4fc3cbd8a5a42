import { mkdtempSync, readFileSync, writeFileSync, copyFileSync, readdirSync }
  from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { run } from "../src/cli.js";
import { KINDS, renderFigure } from "../src/render.js";

const SAMPLES = join(__dirname, "..", "samples");

function freshDir(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("reference figures", () => {
  for (const kind of KINDS) {
    it(`renders ${kind} from the shipped samples`, () => {
      const out = freshDir();
      const path = renderFigure(kind, SAMPLES, out);
      const svg = readFileSync(path, "utf8");
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.length).toBeGreaterThan(500);
    });
  }

  it("cli exits 0 for every kind", () => {
    const out = freshDir();
    for (const kind of KINDS) {
      expect(run([kind, "--in", SAMPLES, "--out", out])).toBe(0);
    }
    expect(readdirSync(out).sort()).toEqual(
      [...KINDS].map((k) => `${k}.svg`).sort());
  });
});

describe("empty data", () => {
  it("renders an axes-only norm history from a header-only trajectory", () => {
    const dir = freshDir();
    const header = readFileSync(join(SAMPLES, "trajectory.csv"), "utf8")
      .split("\n")[0];
    writeFileSync(join(dir, "trajectory.csv"), header + "\n");
    const out = freshDir();
    expect(run(["norm-history", "--in", dir, "--out", out])).toBe(0);
    const svg = readFileSync(join(out, "norm-history.svg"), "utf8");
    expect(svg.startsWith("<svg")).toBe(true);
  });
});

describe("schema rejection", () => {
  it("rejects a renamed column with nonzero exit", () => {
    const dir = freshDir();
    const text = readFileSync(join(SAMPLES, "trajectory.csv"), "utf8");
    writeFileSync(join(dir, "trajectory.csv"),
                  text.replace("linf", "sup_norm"));
    expect(run(["norm-history", "--in", dir, "--out", freshDir()])).toBe(1);
  });

  it("rejects a non-numeric cell", () => {
    const dir = freshDir();
    const lines = readFileSync(join(SAMPLES, "contraction.csv"), "utf8")
      .trim().split("\n");
    const broken = lines[1].split(",");
    broken[1] = "not_a_number";
    lines[1] = broken.join(",");
    writeFileSync(join(dir, "contraction.csv"), lines.join("\n") + "\n");
    expect(run(["contraction-fit", "--in", dir, "--out", freshDir()])).toBe(1);
  });

  it("rejects a missing file", () => {
    expect(run(["omega-distance", "--in", freshDir(), "--out", freshDir()]))
      .toBe(1);
  });

  it("rejects a short row", () => {
    const dir = freshDir();
    const lines = readFileSync(join(SAMPLES, "omega_distance.csv"), "utf8")
      .trim().split("\n");
    lines[1] = lines[1].split(",").slice(0, 3).join(",");
    writeFileSync(join(dir, "omega_distance.csv"), lines.join("\n") + "\n");
    expect(run(["omega-distance", "--in", dir, "--out", freshDir()])).toBe(1);
  });
});

describe("usage errors", () => {
  it("unknown kind exits 2", () => {
    expect(run(["pie-chart", "--in", SAMPLES, "--out", freshDir()])).toBe(2);
  });

  it("missing flags exit 2", () => {
    expect(run(["norm-history"])).toBe(2);
  });
});
