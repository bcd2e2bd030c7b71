/**
 * Deterministic random streams (sfc32 core, string-hash seeding).
 * Every draw in the trainer goes through one of these so runs replay
 * exactly for a given seed on any platform.
 */

function hashSeed(text: string): [number, number, number, number] {
  // FNV-style mixing into four 32-bit lanes
  let h1 = 0x9e3779b9, h2 = 0x243f6a88, h3 = 0xb7e15162, h4 = 0xdeadbeef;
  for (let i = 0; i < text.length; i++) {
    const ch = text.charCodeAt(i);
    h1 = Math.imul(h1 ^ ch, 2654435761);
    h2 = Math.imul(h2 ^ ch, 1597334677);
    h3 = Math.imul(h3 ^ ch, 2869860233);
    h4 = Math.imul(h4 ^ ch, 951274213);
  }
  h1 ^= h2 >>> 15; h2 ^= h3 >>> 13; h3 ^= h4 >>> 11; h4 ^= h1 >>> 7;
  return [h1 >>> 0, h2 >>> 0, h3 >>> 0, h4 >>> 0];
}

export class Rng {
  private a: number;
  private b: number;
  private c: number;
  private d: number;
  private spare: number | null = null;

  constructor(seed: number | string, ...key: (number | string)[]) {
    [this.a, this.b, this.c, this.d] = hashSeed([seed, ...key].join(""));
    for (let i = 0; i < 12; i++) this.next(); // decorrelate from the seed hash
  }

  /** Uniform in [0, 1). */
  next(): number {
    this.a >>>= 0; this.b >>>= 0; this.c >>>= 0; this.d >>>= 0;
    let t = (this.a + this.b) | 0;
    this.a = this.b ^ (this.b >>> 9);
    this.b = (this.c + (this.c << 3)) | 0;
    this.c = (this.c << 21) | (this.c >>> 11);
    this.d = (this.d + 1) | 0;
    t = (t + this.d) | 0;
    this.c = (this.c + t) | 0;
    return (t >>> 0) / 4294967296;
  }

  int(bound: number): number {
    return Math.floor(this.next() * bound);
  }

  /** Standard normal via Box-Muller. */
  gauss(): number {
    if (this.spare !== null) {
      const v = this.spare;
      this.spare = null;
      return v;
    }
    let u = 0;
    while (u === 0) u = this.next();
    const v = this.next();
    const r = Math.sqrt(-2.0 * Math.log(u));
    this.spare = r * Math.sin(2.0 * Math.PI * v);
    return r * Math.cos(2.0 * Math.PI * v);
  }

  fillGauss(out: Float64Array, scale = 1.0): void {
    for (let i = 0; i < out.length; i++) out[i] = this.gauss() * scale;
  }

  /** Fisher-Yates shuffle, in place. */
  shuffle<T>(items: T[]): void {
    for (let i = items.length - 1; i > 0; i--) {
      const j = this.int(i + 1);
      [items[i], items[j]] = [items[j], items[i]];
    }
  }
}
