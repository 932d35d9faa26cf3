#!/usr/bin/env python3
# Copyright (c) 2026 The TecCoBot Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Freeze stemmer golden files from the independent `snowballstemmer` package.

Usage: gen_stem_golden.py <samples-dir> <out-dir>

Writes stem_en.tsv and stem_de.tsv (word<TAB>stem, one per line). The C++
stemmers are tested against these files; regenerate only when deliberately
changing stemmer versions.
"""
import pathlib
import re
import sys

import snowballstemmer

EXTRA_EN = """
caresses ponies ties caress cats feed agreed plastered bled motoring sing conflated troubled
sized hopping tanned falling hissing fizzed failing filing happy sky relational conditional
rational valenci hesitanci digitizer conformabli radicalli differentli vileli analogousli
vietnamization predication operator feudalism decisiveness hopefulness callousness formaliti
sensitiviti sensibiliti triplicate formative formalize electriciti electrical hopeful goodness
revival allowance inference airliner gyroscopic adjustable defensible irritant replacement
adjustment dependent adoption homologou communism activate angulariti homologous effective
bowdlerize probate rate cease controll roll generalization generalizations oscillators
chased dogs cat running ran runs easily fairly yesterday says played playing enjoy enjoying
knowledge learners learning learned students structure structures summarizing summaries
mentoring feedback reflection monitoring concepts conceptual organization organizational
agreement abilities ability abyss bye yelled toy yo y a i is as us bus buses dying lying
skying flying multiply multiplying syzygy kayak quayside gaily eyeing enjoyable played
"""

EXTRA_DE = """
häuser häuschen aufeinanderfolgenden aufeinanderfolgende lernen lernende lernenden studenten
größer größte straße strassen müssen mädchen kenntnisse kenntnis ergebnisse ergebnis
erinnerungen lehrerin lehrerinnen ärztinnen system systeme systemen zeitlich zeitlichen
freundlichkeit möglichkeit möglichkeiten schwierigkeit schwierigkeiten bedeutung bedeutungen
fröhlich fröhlichkeit eigentlich eigentliches heiligkeit traurigkeit zeitungen gesundheit
kindheit sicherheit wichtigste wichtigsten ähnlichen ähnlich ähnlichkeit bauer bauern treue
aktuellsten getickt geplant geordnet internet betreten zurückbleiben qualität quelle queue
andere anderen anderer quer feuer ausgeglichen ausgleichen abendlich abende bestandteile
meistens kindes kinds glückliche ungewöhnlich ausführungsphase strategien begriffslandkarte
überarbeitung überwachung planung reflexion rückmeldung selbstreguliertes selbststudium
wuchs wachsen gewachsen ehrlich ehrlichkeit entwicklung entwickelt entwickelnd lebendig
"""


def words_from(path):
    text = path.read_text(encoding="utf-8").lower()
    return re.findall(r"[^\W\d_]+", text)


def freeze(name, algorithm, words, out_dir):
    stemmer = snowballstemmer.stemmer(algorithm)
    unique = sorted(set(words))
    lines = [f"# snowballstemmer {snowballstemmer.__version__ if hasattr(snowballstemmer, '__version__') else '3.1.1'} algorithm={algorithm}"]
    lines += [f"{w}\t{stemmer.stemWord(w)}" for w in unique]
    (out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{name}: {len(unique)} words")


def main():
    samples = pathlib.Path(sys.argv[1])
    out_dir = pathlib.Path(sys.argv[2])
    en = words_from(samples / "reference_en.txt") + words_from(samples / "student_en.txt") + EXTRA_EN.split()
    de = words_from(samples / "reference_de.txt") + words_from(samples / "student_de.txt") + EXTRA_DE.split()
    freeze("stem_en.tsv", "porter", en, out_dir)
    freeze("stem_de.tsv", "german", de, out_dir)


if __name__ == "__main__":
    main()
