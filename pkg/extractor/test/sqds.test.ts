import { describe, expect, it } from 'vitest';

import { decodeSqds, encodeSqds } from '../src/sqds.js';

describe('descriptor file encoding', () => {
  it('writes the exact binary layout', () => {
    const buf = encodeSqds({ sourceTag: 'ab', rows: [new Float32Array([1, 0])] });
    // magic, version=1, count=1, dim=2
    expect(buf.subarray(0, 4).toString('ascii')).toBe('SQDS');
    expect(buf.readUInt32LE(4)).toBe(1);
    expect(buf.readUInt32LE(8)).toBe(1);
    expect(buf.readUInt32LE(12)).toBe(2);
    expect(buf.readUInt32LE(16)).toBe(2); // tag length
    expect(buf.subarray(20, 22).toString('utf-8')).toBe('ab');
    expect(buf.readFloatLE(22)).toBe(1);
    expect(buf.readFloatLE(26)).toBe(0);
    expect(buf.length).toBe(30);
  });

  it('round-trips rows, tag and names', () => {
    const rows = [new Float32Array([0.6, 0.8]), new Float32Array([1, 0])];
    const buf = encodeSqds({ sourceTag: 'pool5', rows, frameNames: ['a.pgm', 'b.pgm'] });
    const back = decodeSqds(buf);
    expect(back.sourceTag).toBe('pool5');
    expect(back.frameNames).toEqual(['a.pgm', 'b.pgm']);
    expect(Array.from(back.rows[0])).toEqual([Math.fround(0.6), Math.fround(0.8)]);
    expect(Array.from(back.rows[1])).toEqual([1, 0]);
  });

  it('rejects ragged rows', () => {
    expect(() =>
      encodeSqds({ sourceTag: 'x', rows: [new Float32Array(2), new Float32Array(3)] }),
    ).toThrow();
  });
});
