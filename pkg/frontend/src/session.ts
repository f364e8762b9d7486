/** Annotation session state and the press-and-hold trace recorder. */

import type { PlanePoint } from "./plane.js";

/** One captured affect sample, timestamped on the playback clock. */
export interface AnnotationEvent {
  tMs: number;
  valence: number;
  arousal: number;
}

/** Per-song ratings collected alongside the continuous trace. */
export interface SongAnnotation {
  songId: string;
  /** Audio file name the trace belongs to, copied into the manifest. */
  audioRef: string;
  events: AnnotationEvent[];
  familiar: boolean;
  /** 1 = unsure, 2 = fairly sure, 3 = certain; null until rated. */
  confidence: 1 | 2 | 3 | null;
}

/** Everything one participant produces in a sitting. */
export interface AnnotationSession {
  subjectId: string;
  songs: SongAnnotation[];
}

export function newSongAnnotation(songId: string, audioRef: string): SongAnnotation {
  return { songId, audioRef, events: [], familiar: false, confidence: null };
}

export function newSession(subjectId: string, songs: Array<{ songId: string; audioRef: string }>): AnnotationSession {
  return {
    subjectId,
    songs: songs.map((s) => newSongAnnotation(s.songId, s.audioRef)),
  };
}

/**
 * Reasons a song cannot be exported yet, empty when it is ready.
 * An empty trace and a missing confidence rating both block export.
 */
export function exportBlockers(song: SongAnnotation): string[] {
  const reasons: string[] = [];
  if (song.events.length === 0) {
    reasons.push(`${song.songId}: no annotation trace recorded`);
  }
  if (song.confidence === null) {
    reasons.push(`${song.songId}: confidence not rated`);
  }
  return reasons;
}

/** Source of truth for timestamps: the audio player, not the wall clock. */
export interface PlaybackClock {
  currentTimeS(): number;
  isPlaying(): boolean;
}

/** Timer indirection so tests can drive sampling deterministically. */
export interface Scheduler {
  set(fn: () => void, intervalMs: number): unknown;
  clear(handle: unknown): void;
}

const intervalScheduler: Scheduler = {
  set: (fn, intervalMs) => setInterval(fn, intervalMs),
  clear: (handle) => clearInterval(handle as ReturnType<typeof setInterval>),
};

/**
 * Records a song's affect trace while the pointer is held down.
 *
 * A press captures a sample immediately and starts a periodic timer so
 * a motionless hold still streams samples at the configured rate; every
 * move while pressed captures one more. Samples are dropped while the
 * player is paused, and timestamps come from the playback clock so the
 * trace lines up with the audio no matter when the participant pauses.
 * Timestamps are kept strictly increasing; a duplicate or rewound clock
 * reading is skipped rather than recorded out of order.
 */
export class SessionRecorder {
  private point: PlanePoint | null = null;
  private handle: unknown = null;

  constructor(
    private readonly song: SongAnnotation,
    private readonly clock: PlaybackClock,
    private readonly rateHz: number = 10,
    private readonly scheduler: Scheduler = intervalScheduler,
  ) {
    if (!(rateHz > 0)) {
      throw new Error("sampling rate must be positive");
    }
  }

  get pressed(): boolean {
    return this.handle !== null;
  }

  pointerDown(point: PlanePoint): void {
    this.point = point;
    if (this.handle === null) {
      this.handle = this.scheduler.set(() => this.sample(), 1000 / this.rateHz);
    }
    this.sample();
  }

  /** Hovering without a press records nothing. */
  pointerMove(point: PlanePoint): void {
    if (this.handle === null) {
      return;
    }
    this.point = point;
    this.sample();
  }

  pointerUp(): void {
    if (this.handle !== null) {
      this.scheduler.clear(this.handle);
      this.handle = null;
    }
    this.point = null;
  }

  private sample(): void {
    if (this.point === null || !this.clock.isPlaying()) {
      return;
    }
    const tMs = Math.round(this.clock.currentTimeS() * 1000);
    if (tMs < 0) {
      return;
    }
    const events = this.song.events;
    const last = events.length > 0 ? events[events.length - 1] : undefined;
    if (last !== undefined && tMs <= last.tMs) {
      return;
    }
    events.push({ tMs, valence: this.point.valence, arousal: this.point.arousal });
  }
}
