/**
 * Minimal mesh parsers for the file picker: binary/ASCII STL and OBJ
 * (vertices and faces only). Returns raw triangle soup so the render layer
 * decides how to build GPU geometry; keeping this three-free makes it
 * testable headlessly.
 */

export interface ParsedMesh {
  /** flat xyz triples, three vertices per triangle */
  positions: Float32Array;
}

export function parseStl(data: ArrayBuffer): ParsedMesh {
  const head = new TextDecoder().decode(data.slice(0, 512));
  if (head.trimStart().toLowerCase().startsWith("solid") && head.includes("facet")) {
    return parseAsciiStl(new TextDecoder().decode(data));
  }
  return parseBinaryStl(data);
}

function parseBinaryStl(data: ArrayBuffer): ParsedMesh {
  if (data.byteLength < 84) throw new Error("binary STL truncated");
  const view = new DataView(data);
  const count = view.getUint32(80, true);
  if (data.byteLength < 84 + count * 50) throw new Error("binary STL truncated");
  const positions = new Float32Array(count * 9);
  for (let i = 0; i < count; i++) {
    const base = 84 + i * 50 + 12; // skip the per-facet normal
    for (let v = 0; v < 9; v++) {
      positions[i * 9 + v] = view.getFloat32(base + v * 4, true);
    }
  }
  return { positions };
}

function parseAsciiStl(text: string): ParsedMesh {
  const out: number[] = [];
  const re = /vertex\s+([^\s]+)\s+([^\s]+)\s+([^\s]+)/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(text)) !== null) {
    out.push(parseFloat(m[1]!), parseFloat(m[2]!), parseFloat(m[3]!));
  }
  if (out.length === 0 || out.length % 9 !== 0) {
    throw new Error("ASCII STL has no complete facets");
  }
  return { positions: new Float32Array(out) };
}

export function parseObj(text: string): ParsedMesh {
  const verts: number[][] = [];
  const out: number[] = [];
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (line.startsWith("v ")) {
      const p = line.split(/\s+/).slice(1, 4).map(Number);
      if (p.length === 3 && p.every(Number.isFinite)) verts.push(p);
    } else if (line.startsWith("f ")) {
      const idx = line
        .split(/\s+/)
        .slice(1)
        .map((tok) => {
          const i = parseInt(tok.split("/")[0]!, 10);
          return i < 0 ? verts.length + i : i - 1; // negative = relative
        });
      for (let k = 1; k + 1 < idx.length; k++) { // fan-triangulate
        for (const j of [idx[0]!, idx[k]!, idx[k + 1]!]) {
          const v = verts[j];
          if (!v) throw new Error(`OBJ face references missing vertex ${j + 1}`);
          out.push(v[0]!, v[1]!, v[2]!);
        }
      }
    }
  }
  if (out.length === 0) throw new Error("OBJ has no faces");
  return { positions: new Float32Array(out) };
}
