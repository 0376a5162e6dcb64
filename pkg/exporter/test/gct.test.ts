import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { encodeGct, readGct, writeGct } from "../src/gct";
import { readPnm } from "../src/pnm";

const tmp = () => mkdtempSync(join(tmpdir(), "gct-"));

describe("gct container", () => {
  it("writes the documented header for a uint8 2x2 tensor", () => {
    const blob = encodeGct([2, 2], new Uint8Array([0, 1, 2, 3]));
    expect(blob.length).toBe(18);
    expect(blob.subarray(0, 4).toString("ascii")).toBe("GCT1");
    expect(blob[4]).toBe(2); // uint8
    expect(blob[5]).toBe(2); // rank
    expect(blob.readUInt32LE(6)).toBe(2);
    expect(blob.readUInt32LE(10)).toBe(2);
  });

  it("round-trips float32 tensors bit-exactly", () => {
    const dir = tmp();
    const path = join(dir, "t.gct");
    const data = new Float32Array([0, -1.5, 3.25e7, 1e-12]);
    writeGct(path, [2, 2], data);
    const back = readGct(path);
    expect(back.dtype).toBe("float32");
    expect(back.shape).toEqual([2, 2]);
    expect(Array.from(back.data as Float32Array)).toEqual(Array.from(data));
  });

  it("is byte-deterministic", () => {
    const data = new Float32Array([1.25, 2.5, 3.75]);
    expect(encodeGct([3], data).equals(encodeGct([3], data))).toBe(true);
  });

  it("rejects shape/data mismatches", () => {
    expect(() => encodeGct([3], new Uint8Array(2))).toThrow(/does not match/);
    expect(() => encodeGct([1, 1, 1, 1, 1], new Uint8Array(1))).toThrow(/rank/);
  });
});

describe("pnm reader", () => {
  it("reads P5 with comments", () => {
    const dir = tmp();
    const path = join(dir, "f.pgm");
    writeFileSync(path, Buffer.concat([
      Buffer.from("P5\n# hello\n2 1\n255\n", "ascii"),
      Buffer.from([7, 9]),
    ]));
    const frame = readPnm(path);
    expect(frame.width).toBe(2);
    expect(frame.channels).toBe(1);
    expect(Array.from(frame.pixels)).toEqual([7, 9]);
  });

  it("rejects non-255 maxval", () => {
    const dir = tmp();
    const path = join(dir, "f.ppm");
    writeFileSync(path, Buffer.from("P6\n1 1\n65535\n" + "\0".repeat(6), "ascii"));
    expect(() => readPnm(path)).toThrow(/maxval/);
  });
});
