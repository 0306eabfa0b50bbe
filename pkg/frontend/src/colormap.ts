/** Fixed viridis colormap (8 anchor stops, linear interpolation). */

const STOPS: [number, number, number][] = [
  [68, 1, 84],
  [70, 50, 127],
  [54, 92, 141],
  [39, 127, 142],
  [31, 161, 135],
  [74, 194, 109],
  [159, 218, 58],
  [253, 231, 37],
];

export function viridis(value: number): [number, number, number] {
  const clamped = Math.min(1, Math.max(0, value));
  const scaled = clamped * (STOPS.length - 1);
  const low = Math.min(STOPS.length - 2, Math.floor(scaled));
  const frac = scaled - low;
  const a = STOPS[low];
  const b = STOPS[low + 1];
  return [
    Math.round(a[0] + frac * (b[0] - a[0])),
    Math.round(a[1] + frac * (b[1] - a[1])),
    Math.round(a[2] + frac * (b[2] - a[2])),
  ];
}

/** Map a matrix onto RGB bytes, normalizing over the given range. */
export function heatmapBytes(
  values: number[][],
  lo: number,
  hi: number
): { width: number; height: number; rgb: Uint8Array } {
  const height = values.length;
  const width = values[0].length;
  const rgb = new Uint8Array(width * height * 3);
  const span = hi - lo || 1;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = viridis((values[y][x] - lo) / span);
      const at = (y * width + x) * 3;
      rgb[at] = r;
      rgb[at + 1] = g;
      rgb[at + 2] = b;
    }
  }
  return { width, height, rgb };
}
