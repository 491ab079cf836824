/** Minimal SVG assembly; figures are plain strings written to disk. */

export function svgDocument(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="11">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    body +
    '\n</svg>\n'
  );
}

export function line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): string {
  return `<line x1="${r(x1)}" y1="${r(y1)}" x2="${r(x2)}" y2="${r(y2)}" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function circle(cx: number, cy: number, radius: number, fill: string): string {
  return `<circle cx="${r(cx)}" cy="${r(cy)}" r="${radius}" fill="${fill}"/>`;
}

export function text(x: number, y: number, content: string, anchor = 'start'): string {
  return `<text x="${r(x)}" y="${r(y)}" text-anchor="${anchor}">${escape(content)}</text>`;
}

export function polyline(points: Array<[number, number]>, stroke: string): string {
  const pts = points.map(([x, y]) => `${r(x)},${r(y)}`).join(' ');
  return `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.5"/>`;
}

function r(v: number): string {
  return (Math.round(v * 100) / 100).toString();
}

function escape(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

/** Diverging blue-to-red scale on [0, 1]. */
export function heatColor(t: number): string {
  const x = Math.max(0, Math.min(1, t));
  const red = Math.round(40 + 215 * x);
  const blue = Math.round(255 - 215 * x);
  const green = Math.round(90 + 60 * (1 - Math.abs(2 * x - 1)));
  return `rgb(${red},${green},${blue})`;
}
