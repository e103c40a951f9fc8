import init, { editTable, reconcileAndFuse, structure } from "./pkg/metaforge_wasm.js";

const $ = (id) => document.getElementById(id);

const TEXT = [
  "d1\tTitle\t0\t0\tNotice on epidemic prevention",
  "d1\tSection1\t1\t0\tI. Scope",
  "d1\tParagraph\t2\t0\tThe office uses the forms below.",
  "d1\tSection2\t3\t0\t(1) Submission",
  "d1\tParagraph\t4\t0\tEach unit provides a weekly report.",
  "d1\tDateOfWriting\t5\t0\t3 March 2020",
].join("\n");

const IMAGE = [
  "d1\t1\tTitle\t0.95\t100\t40\t400\t30\tNotice on epidemlc prevention",
  "d1\t1\tSection2\t0.80\t60\t100\t120\t20\tI. Scope",
  "d1\t1\tSection2\t0.90\t60\t180\t160\t20\t(1) Submisson",
  "d1\t1\tParagraph\t0.40\t60\t300\t50\t20\t#%@!",
].join("\n");

function el(tag, text, cls) {
  const e = document.createElement(tag);
  if (text !== undefined) e.textContent = text;
  if (cls) e.className = cls;
  return e;
}

function showError(target, v) {
  target.replaceChildren(el("p", v.error, "error"));
  return true;
}

function runEdit() {
  const v = JSON.parse(editTable($("lev-a").value, $("lev-b").value));
  $("lev-distance").textContent = `distance ${v.distance}`;
  const onPath = new Set(v.path.map(([i, j]) => `${i},${j}`));
  const table = el("table");
  const head = el("tr");
  head.append(el("th"), el("th", "ε"), ...v.b.map((c) => el("th", c)));
  table.append(head);
  v.table.forEach((row, i) => {
    const tr = el("tr");
    tr.append(el("th", i === 0 ? "ε" : v.a[i - 1]));
    row.forEach((d, j) => tr.append(el("td", String(d), onPath.has(`${i},${j}`) ? "path" : "")));
    table.append(tr);
  });
  $("lev-table").replaceChildren(table);
}

function runFuse() {
  const v = JSON.parse(reconcileAndFuse($("fuse-text").value, $("fuse-image").value, Number($("fuse-threshold").value)));
  if (v.error) return showError($("fuse-matches"), v) && ($("fuse-out").textContent = "");
  const table = el("table");
  const head = el("tr");
  head.append(...["doc", "image", "ocr", "text", "distance", "accepted"].map((h) => el("th", h)));
  table.append(head);
  for (const m of v.matches) {
    const tr = el("tr");
    tr.append(
      el("td", m.doc_id),
      el("td", String(m.image_index)),
      el("td", m.ocr),
      el("td", m.text ?? "-"),
      el("td", String(m.distance)),
      el("td", m.accepted ? "yes" : "no", m.accepted ? "ok" : "error"),
    );
    table.append(tr);
  }
  $("fuse-matches").replaceChildren(table, ...v.diagnostics.map((d) => el("p", d)));
  $("fuse-out").textContent = v.fused;
}

function runTree() {
  const v = JSON.parse(structure($("tree-text").value, Number($("tree-depth").value)));
  if (v.error) return showError($("tree-out"), v);
  const parts = [];
  for (const d of v) {
    parts.push(el("pre", d.outline));
    const status = d.violations.length === 0 ? "ordering properties hold" : d.violations.join("\n");
    parts.push(el("p", status, d.violations.length === 0 ? "ok" : "error"));
    parts.push(...d.warnings.map((w) => el("p", w)));
    const details = el("details");
    details.append(el("summary", "Graphviz source"), el("pre", d.dot));
    parts.push(details);
  }
  $("tree-out").replaceChildren(...parts);
}

await init();
$("fuse-text").value = TEXT;
$("fuse-image").value = IMAGE;
$("tree-text").value = TEXT;
$("lev-run").onclick = runEdit;
$("fuse-run").onclick = runFuse;
$("tree-run").onclick = runTree;
runEdit();
runFuse();
runTree();
