/** Keyword highlighting inside evidence text.
 *
 * Marks exactly the retrieval keywords: case-insensitive, whole-token
 * matches only, multi-word keywords as contiguous token runs.
 */

export interface Segment {
  text: string;
  highlighted: boolean;
}

const TOKEN_RE = /[\p{L}\p{N}]+/gu;

interface Span {
  start: number;
  end: number;
  lower: string;
}

function tokenSpans(text: string): Span[] {
  const spans: Span[] = [];
  for (const match of text.matchAll(TOKEN_RE)) {
    spans.push({
      start: match.index ?? 0,
      end: (match.index ?? 0) + match[0].length,
      lower: match[0].toLowerCase(),
    });
  }
  return spans;
}

function keywordTokens(keyword: string): string[] {
  return (keyword.match(TOKEN_RE) ?? []).map((t) => t.toLowerCase());
}

export function highlightKeywords(text: string, keywords: string[]): Segment[] {
  const spans = tokenSpans(text);
  const marked: Array<[number, number]> = [];
  for (const keyword of keywords) {
    const needle = keywordTokens(keyword);
    if (needle.length === 0) continue;
    for (let i = 0; i + needle.length <= spans.length; i++) {
      let hit = true;
      for (let j = 0; j < needle.length; j++) {
        if (spans[i + j]!.lower !== needle[j]) {
          hit = false;
          break;
        }
      }
      if (hit) {
        marked.push([spans[i]!.start, spans[i + needle.length - 1]!.end]);
      }
    }
  }
  if (marked.length === 0) {
    return text ? [{ text, highlighted: false }] : [];
  }
  marked.sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  const merged: Array<[number, number]> = [];
  for (const [start, end] of marked) {
    const last = merged[merged.length - 1];
    if (last && start <= last[1]) {
      last[1] = Math.max(last[1], end);
    } else {
      merged.push([start, end]);
    }
  }
  const segments: Segment[] = [];
  let cursor = 0;
  for (const [start, end] of merged) {
    if (start > cursor) {
      segments.push({ text: text.slice(cursor, start), highlighted: false });
    }
    segments.push({ text: text.slice(start, end), highlighted: true });
    cursor = end;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), highlighted: false });
  }
  return segments;
}
