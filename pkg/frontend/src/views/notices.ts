/** Non-blocking notice strip; API failures land here with the server's
 * reason text, never as a blocking dialog. */

import type { Notice } from "../state.js";
import { esc } from "./common.js";

export function renderNotices(notices: Notice[]): string {
  if (notices.length === 0) return `<div class="notices empty"></div>`;
  const items = notices
    .map(
      (n, i) =>
        `<div class="notice ${n.kind}" data-index="${i}">` +
        `<span class="notice-text">${esc(n.text)}</span>` +
        `<button class="dismiss" data-action="dismiss-notice" data-index="${i}">x</button>` +
        `</div>`,
    )
    .join("");
  return `<div class="notices">${items}</div>`;
}
