/**
 * Dataset ingestion for the two CSV layouts.
 *
 * Task A data: header id,sent0,sent1. Task B data: header
 * id,FalseSent,OptionA,OptionB,OptionC. Answer files are headerless
 * id,label rows (a literal id,label header is tolerated); labels are
 * 0/1 for task A and letters A/B/C for task B.
 */
import { readFileSync } from "node:fs";

import Papa from "papaparse";

export type Task = "A" | "B";

export interface PairInstance {
  id: number;
  sent0: string;
  sent1: string;
  label?: number;
}

export interface ChoiceInstance {
  id: number;
  falseStatement: string;
  options: [string, string, string];
  label?: number;
}

export interface Dataset<I> {
  task: Task;
  instances: I[];
}

const HEADER_A = ["id", "sent0", "sent1"];
const HEADER_B = ["id", "FalseSent", "OptionA", "OptionB", "OptionC"];
const LETTERS = ["A", "B", "C"];

function rows(text: string, source: string): string[][] {
  const stripped = text.replace(/^﻿/, "");
  const parsed = Papa.parse<string[]>(stripped.trim(), {
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    throw new Error(`${source}: malformed CSV: ${first.message}`);
  }
  return parsed.data;
}

function parseId(raw: string | undefined, source: string, line: number): number {
  if (raw === undefined || !/^\d+$/.test(raw.trim())) {
    throw new Error(`${source} row ${line}: id must be a non-negative integer`);
  }
  return Number(raw.trim());
}

function checkHeader(row: string[] | undefined, want: string[], source: string): void {
  const got = (row ?? []).map((c) => c.trim());
  if (got.length !== want.length || want.some((w, i) => got[i] !== w)) {
    throw new Error(
      `${source}: expected header ${want.join(",")}, got ${got.join(",")}`
    );
  }
}

function checkUniqueIds(ids: number[], source: string): void {
  const seen = new Set<number>();
  for (const id of ids) {
    if (seen.has(id)) {
      throw new Error(`${source}: duplicate id ${id}`);
    }
    seen.add(id);
  }
}

/** Parse headerless id,label answer rows into an id -> label map. */
export function parseAnswers(text: string, task: Task, source: string): Map<number, number> {
  const out = new Map<number, number>();
  const data = rows(text, source);
  data.forEach((row, index) => {
    if (index === 0 && row[0]?.trim() === "id" && row[1]?.trim() === "label") {
      return; // optional literal header
    }
    if (row.length !== 2) {
      throw new Error(`${source} row ${index + 1}: expected id,label`);
    }
    const id = parseId(row[0], source, index + 1);
    const raw = row[1]!.trim();
    let label: number;
    if (task === "A") {
      if (raw !== "0" && raw !== "1") {
        throw new Error(`${source} row ${index + 1}: label must be 0 or 1, got ${raw}`);
      }
      label = Number(raw);
    } else {
      label = LETTERS.indexOf(raw.toUpperCase());
      if (label < 0) {
        throw new Error(`${source} row ${index + 1}: label must be A, B or C, got ${raw}`);
      }
    }
    if (out.has(id)) {
      throw new Error(`${source}: duplicate id ${id}`);
    }
    out.set(id, label);
  });
  return out;
}

function joinLabels<I extends { id: number; label?: number }>(
  instances: I[],
  answers: Map<number, number>,
  source: string
): void {
  const ids = new Set(instances.map((i) => i.id));
  for (const id of answers.keys()) {
    if (!ids.has(id)) {
      throw new Error(`${source}: answer for unknown id ${id}`);
    }
  }
  for (const inst of instances) {
    const label = answers.get(inst.id);
    if (label === undefined) {
      throw new Error(`${source}: no answer for id ${inst.id}`);
    }
    inst.label = label;
  }
}

export function parseTaskACsv(
  dataCsv: string,
  answersCsv?: string,
  source = "<task A data>"
): Dataset<PairInstance> {
  const data = rows(dataCsv, source);
  checkHeader(data[0], HEADER_A, source);
  const instances: PairInstance[] = data.slice(1).map((row, index) => {
    if (row.length !== 3) {
      throw new Error(`${source} row ${index + 2}: expected 3 fields, got ${row.length}`);
    }
    return { id: parseId(row[0], source, index + 2), sent0: row[1]!, sent1: row[2]! };
  });
  checkUniqueIds(instances.map((i) => i.id), source);
  if (answersCsv !== undefined) {
    joinLabels(instances, parseAnswers(answersCsv, "A", source), source);
  }
  return { task: "A", instances };
}

export function parseTaskBCsv(
  dataCsv: string,
  answersCsv?: string,
  source = "<task B data>"
): Dataset<ChoiceInstance> {
  const data = rows(dataCsv, source);
  checkHeader(data[0], HEADER_B, source);
  const instances: ChoiceInstance[] = data.slice(1).map((row, index) => {
    if (row.length !== 5) {
      throw new Error(`${source} row ${index + 2}: expected 5 fields, got ${row.length}`);
    }
    return {
      id: parseId(row[0], source, index + 2),
      falseStatement: row[1]!,
      options: [row[2]!, row[3]!, row[4]!],
    };
  });
  checkUniqueIds(instances.map((i) => i.id), source);
  if (answersCsv !== undefined) {
    joinLabels(instances, parseAnswers(answersCsv, "B", source), source);
  }
  return { task: "B", instances };
}

export function loadTaskA(dataPath: string, answersPath?: string): Dataset<PairInstance> {
  return parseTaskACsv(
    readFileSync(dataPath, "utf-8"),
    answersPath === undefined ? undefined : readFileSync(answersPath, "utf-8"),
    dataPath
  );
}

export function loadTaskB(dataPath: string, answersPath?: string): Dataset<ChoiceInstance> {
  return parseTaskBCsv(
    readFileSync(dataPath, "utf-8"),
    answersPath === undefined ? undefined : readFileSync(answersPath, "utf-8"),
    dataPath
  );
}
