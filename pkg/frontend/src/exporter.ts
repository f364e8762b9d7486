/** Serialization of a finished session into pipeline-ready files. */

import type { AnnotationSession, SongAnnotation } from "./session.js";
import { exportBlockers } from "./session.js";

/** One file the browser should offer for download. */
export interface ExportFile {
  name: string;
  text: string;
}

/** Manifest entry for one annotated song. */
export interface TrialFragment {
  song_id: string;
  audio: string;
  annotations: string;
  familiarity: number;
  confidence: number;
}

/** Subject block to splice into the dataset manifest. */
export interface ManifestFragment {
  subject_id: string;
  trials: TrialFragment[];
}

export interface ExportBundle {
  files: ExportFile[];
  fragment: ManifestFragment;
}

function safeName(raw: string): string {
  return raw.replace(/[^A-Za-z0-9_.-]/g, "-");
}

export function annotationFileName(subjectId: string, songId: string): string {
  return `${safeName(subjectId)}__${safeName(songId)}_annotations.csv`;
}

/**
 * Render a trace as annotation CSV lines "t_ms,valence,arousal".
 *
 * Numbers are written with the runtime's shortest round-trip decimal
 * form, so a consumer parsing them as 64-bit floats recovers the exact
 * recorded values. No header line; the ingestion side expects data from
 * the first line.
 */
export function annotationFileText(song: SongAnnotation): string {
  return song.events.map((e) => `${e.tMs},${String(e.valence)},${String(e.arousal)}`).join("\n") + "\n";
}

/**
 * Bundle a session into downloadable files plus a manifest fragment.
 * Throws with every blocking reason when any song is incomplete.
 */
export function exportSession(session: AnnotationSession): ExportBundle {
  const blockers = session.songs.flatMap(exportBlockers);
  if (blockers.length > 0) {
    throw new Error(`session not ready to export: ${blockers.join("; ")}`);
  }
  const files: ExportFile[] = [];
  const trials: TrialFragment[] = [];
  for (const song of session.songs) {
    const name = annotationFileName(session.subjectId, song.songId);
    files.push({ name, text: annotationFileText(song) });
    trials.push({
      song_id: song.songId,
      audio: song.audioRef,
      annotations: name,
      familiarity: song.familiar ? 1 : 0,
      confidence: song.confidence as number,
    });
  }
  const fragment: ManifestFragment = { subject_id: session.subjectId, trials };
  files.push({
    name: `${safeName(session.subjectId)}_manifest_fragment.json`,
    text: JSON.stringify(fragment, null, 1) + "\n",
  });
  return { files, fragment };
}
