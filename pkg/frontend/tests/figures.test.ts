import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { render } from "../src/figures.js";
import { MissingColumnError } from "../src/csv.js";
import { main } from "../src/render.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const samples = path.join(here, "..", "sample-data");

function outDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "figs-"));
}

function writeCsv(dir: string, name: string, content: string): string {
  const p = path.join(dir, name);
  fs.writeFileSync(p, content);
  return p;
}

const FIG2_INPUTS = ["mf_omega0.5.csv", "mf_omega1.csv", "mf_omega2.csv"].map((f) =>
  path.join(samples, f),
);
const FIG3_INPUTS = ["sweep.csv", "fit.csv", "solid_angle.csv"].map((f) =>
  path.join(samples, f),
);

describe("fig2 and fig3 from shipped sample data", () => {
  it("renders fig2 without error and deterministically", () => {
    const dir = outDir();
    const out1 = path.join(dir, "fig2_a.svg");
    const out2 = path.join(dir, "fig2_b.svg");
    render({ figureId: "fig2", inputs: FIG2_INPUTS, output: out1 });
    render({ figureId: "fig2", inputs: FIG2_INPUTS, output: out2 });
    const a = fs.readFileSync(out1);
    expect(a.length).toBeGreaterThan(500);
    expect(a.toString()).toContain("<svg");
    expect(a.equals(fs.readFileSync(out2))).toBe(true);
  });

  it("renders fig3 with overlays and deterministically", () => {
    const dir = outDir();
    const out1 = path.join(dir, "fig3_a.svg");
    const out2 = path.join(dir, "fig3_b.svg");
    render({ figureId: "fig3", inputs: FIG3_INPUTS, output: out1 });
    render({ figureId: "fig3", inputs: FIG3_INPUTS, output: out2 });
    const svg = fs.readFileSync(out1, "utf8");
    expect(svg).toContain("stroke-dasharray");  // fit curve and limit line
    expect(svg).toContain("<circle");           // orbit-average points
    expect(fs.readFileSync(out2, "utf8")).toBe(svg);
  });

  it("does not modify its inputs", () => {
    const before = FIG2_INPUTS.map((f) => fs.readFileSync(f));
    render({ figureId: "fig2", inputs: FIG2_INPUTS, output: path.join(outDir(), "x.svg") });
    FIG2_INPUTS.forEach((f, i) => expect(fs.readFileSync(f).equals(before[i])).toBe(true));
  });
});

describe("column validation", () => {
  it("names the missing column and file", () => {
    const dir = outDir();
    const bad = writeCsv(dir, "bad.csv", "t,wrong\n0,1\n");
    try {
      render({ figureId: "fig2", inputs: [bad], output: path.join(dir, "x.svg") });
      throw new Error("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(MissingColumnError);
      expect((err as MissingColumnError).column).toBe("m2");
      expect((err as MissingColumnError).file).toContain("bad.csv");
    }
  });
});

describe("remaining figures on synthetic inputs", () => {
  it("fig4 and fig5", () => {
    const dir = outDir();
    const ld = writeCsv(dir, "ld.csv", "t,m_x,m_y,m_z,m2,purity\n0,0,0,1,0,1\n1,0.1,0,0.5,0.1,0.8\n");
    const ls = writeCsv(dir, "ls.csv", "omega,m2,purity,converged,t_stop\n0.5,0.2,0.99,1,30\n2,0.1,0.2,1,200\n");
    render({ figureId: "fig4", inputs: [ld], output: path.join(dir, "f4.svg") });
    render({ figureId: "fig5", inputs: [ls], output: path.join(dir, "f5.svg") });
    expect(fs.existsSync(path.join(dir, "f4.svg"))).toBe(true);
    expect(fs.existsSync(path.join(dir, "f5.svg"))).toBe(true);
  });

  it("fig1, fig6, fig7, fig8", () => {
    const dir = outDir();
    const header =
      "t," +
      ["qj", "mu", "qsd"]
        .flatMap((k) => ["mz", "m2", "ent"].flatMap((q) => [`${k}_${q}_mean`, `${k}_${q}_stderr`]))
        .join(",");
    const row = (t: number) => [t, ...Array.from({ length: 18 }, (_, i) => 0.1 * ((i + t) % 5))].join(",");
    const cmp = writeCsv(dir, "cmp.csv", `${header}\n${row(0)}\n${row(1)}\n${row(2)}\n`);
    render({ figureId: "fig1", inputs: [cmp], output: path.join(dir, "f1.svg") });

    const ens = writeCsv(dir, "ens.csv", "t,mz_mean,mz_stderr,m2_mean,m2_stderr,ent_mean,ent_stderr\n0,1,0,0,0,0,0\n1,0.5,0.01,0.2,0.01,0.4,0.01\n2,0.4,0.01,0.21,0.01,0.5,0.01\n");
    fs.writeFileSync(ens + ".meta", "experiment=trajectory-ensemble\nn=10\nomega=2.0\nunraveling=qj\n");
    render({ figureId: "fig6", inputs: [ens], output: path.join(dir, "f6.svg") });

    const mf = writeCsv(dir, "mf.csv", "t,m_x,m_y,m_z,m2\n0,0,0,1,0\n1,0.2,0.1,0.6,0.15\n2,0.1,0.2,0.4,0.2\n");
    const ld = writeCsv(dir, "ld.csv", "t,m_x,m_y,m_z,m2,purity\n0,0,0,1,0,1\n1,0.1,0,0.5,0.1,0.8\n2,0.1,0,0.45,0.1,0.7\n");
    render({ figureId: "fig7", inputs: [ens, ld, mf], output: path.join(dir, "f7.svg") });

    const hist = (name: string) =>
      writeCsv(dir, name, "bin_left,bin_right,density_qj,density_qsd\n0,0.5,1.2,1.1\n0.5,1,0.8,0.9\n");
    render({
      figureId: "fig8",
      inputs: [hist("h_m2.csv"), hist("h_snhalf.csv"), hist("h_mz.csv")],
      output: path.join(dir, "f8.svg"),
    });
    for (const f of ["f1", "f6", "f7", "f8"]) {
      expect(fs.readFileSync(path.join(dir, `${f}.svg`), "utf8")).toContain("</svg>");
    }
  });
});

describe("command line", () => {
  it("renders through main() and rejects bad usage", () => {
    const dir = outDir();
    const out = path.join(dir, "cli.svg");
    expect(main(["--figure", "fig2", "--input", ...FIG2_INPUTS, "--output", out])).toBe(0);
    expect(fs.existsSync(out)).toBe(true);
    expect(main(["--figure", "fig99", "--input", "x.csv", "--output", "y.svg"])).toBe(1);
    expect(main(["--figure", "fig2", "--output", "y.svg"])).toBe(1);
    expect(main(["--figure", "fig2", "--input", path.join(dir, "absent.csv"), "--output", out])).toBe(2);
  });
});
