// Copyright 2026 The Acurisk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <set>
#include <string>

#include "acu/util.hpp"

namespace acu {

// The stop list substitutes for POS-based removal: closed-class words only
// (auxiliaries, adpositions, determiners, pronouns, conjunctions,
// interjections, a few particles). Content words never appear here.
// The resource files under resources/ must stay byte-identical to these
// literals; a unit test enforces it.
inline const char* builtin_stop_words_text() {
  return R"(# auxiliaries, copulas, modals
am
is
are
was
were
be
been
being
do
does
did
doing
done
have
has
had
having
will
would
shall
should
can
could
may
might
must
# negated auxiliary contractions (closed-class; the fixed cue list governs
# negation marking, so these are removed like their uncontracted forms)
isn't
aren't
wasn't
weren't
don't
doesn't
didn't
haven't
hasn't
hadn't
won't
wouldn't
shouldn't
couldn't
can't
cannot
mustn't
# common contractions of pronoun + auxiliary
it's
that's
he's
she's
there's
what's
who's
i'm
i've
i'll
i'd
you're
you've
you'll
you'd
we're
we've
we'll
we'd
they're
they've
they'll
they'd
he'll
she'll
he'd
she'd
# adpositions
of
in
on
at
by
with
from
to
for
about
against
between
into
through
during
before
after
above
below
under
over
up
down
off
near
upon
within
without
across
behind
beyond
among
amid
along
around
beneath
beside
besides
despite
except
inside
outside
onto
toward
towards
underneath
until
till
unto
via
per
since
# determiners and quantifiers
the
a
an
this
that
these
those
each
every
either
neither
some
any
no
all
both
few
fewer
more
most
much
many
several
such
what
which
whose
another
other
same
own
enough
less
least
# pronouns
i
you
he
she
it
we
they
me
him
her
us
them
my
your
his
its
our
their
mine
yours
hers
ours
theirs
myself
yourself
himself
herself
itself
ourselves
yourselves
themselves
who
whom
anyone
anybody
anything
everyone
everybody
everything
someone
somebody
something
nobody
nothing
none
# conjunctions and connectives
and
or
nor
but
so
yet
because
although
though
while
whereas
if
unless
once
when
whenever
where
wherever
as
than
whether
however
moreover
furthermore
nevertheless
nonetheless
meanwhile
therefore
thus
hence
why
how
# particles and pro-adverbs
there
here
then
now
just
only
even
still
very
too
also
quite
rather
almost
already
again
# interjections
oh
ah
wow
ouch
hey
alas
hmm
uh
um
yeah
huh
okay
ok
yes
)";
}

// Fixed negation cue list; cues mark subsequent tokens, never themselves.
inline const char* builtin_negation_cues_text() {
  return R"(no
not
without
denies
denied
negative
)";
}

// Conjunctions that terminate a negation scope early.
inline const char* builtin_scope_breakers_text() {
  return R"(but
however
although
)";
}

// word -> lemma pairs: irregular forms plus words the suffix rules would
// otherwise mangle. Identity pairs protect words from the rules.
inline const char* builtin_lemma_exceptions_text() {
  return R"(diagnoses diagnosis
metastases metastasis
prognoses prognosis
stenoses stenosis
thromboses thrombosis
neuroses neurosis
psychoses psychosis
analyses analysis
men man
women woman
children child
feet foot
teeth tooth
criteria criterion
phenomena phenomenon
died die
agreed agree
better better
worse worse
earliest early
latest late
closest close
largest large
widest wide
nicest nice
safest safe
aches ache
headaches headache
backaches backache
toes toe
shoes shoe
buses bus
viruses virus
statuses status
sinuses sinus
fetuses fetus
bonuses bonus
taking take
using use
causing cause
managing manage
staging stage
dosing dose
scheduling schedule
writing write
giving give
living live
losing lose
moving move
noting note
placing place
producing produce
providing provide
receiving receive
reducing reduce
requiring require
resolving resolve
declining decline
improving improve
increasing increase
decreasing decrease
experiencing experience
evaluating evaluate
tolerating tolerate
continuing continue
discontinuing discontinue
completing complete
discharged discharge
increased increase
decreased decrease
improved improve
managed manage
caused cause
used use
noted note
placed place
provided provide
received receive
reduced reduce
required require
resolved resolve
scheduled schedule
staged stage
dosed dose
tolerated tolerate
continued continue
discontinued discontinue
evaluated evaluate
experienced experience
completed complete
declined decline
advised advise
described describe
prescribed prescribe
pancreas pancreas
diabetes diabetes
herpes herpes
rabies rabies
series series
species species
news news
lens lens
mumps mumps
measles measles
shingles shingles
scabies scabies
ascites ascites
feces feces
forceps forceps
biceps biceps
triceps triceps
)";
}

// Tokens treated as date/time entities and removed during preprocessing.
inline const char* builtin_datetime_words_text() {
  return R"(january
february
march
april
may
june
july
august
september
october
november
december
jan
feb
mar
apr
jun
jul
aug
sep
sept
oct
nov
dec
monday
tuesday
wednesday
thursday
friday
saturday
sunday
mon
tue
tues
wed
thu
thur
thurs
fri
sat
sun
today
tomorrow
yesterday
tonight
morning
evening
afternoon
overnight
noon
midnight
am
pm
day
days
week
weeks
month
months
year
years
hour
hours
minute
minutes
)";
}

// One token per line; '#' starts a comment line; blank lines ignored.
inline std::set<std::string> parse_word_list(std::string_view text) {
  std::set<std::string> out;
  for (const auto& line : split(text, '\n')) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.insert(std::string(t));
  }
  return out;
}

// Two whitespace-separated tokens per line: surface form, lemma.
inline std::map<std::string, std::string> parse_lemma_exceptions(
    std::string_view text) {
  std::map<std::string, std::string> out;
  size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto sp = std::string(t).find(' ');
    if (sp == std::string::npos)
      throw std::invalid_argument("lemma exceptions line " +
                                  std::to_string(line_no) +
                                  ": expected two tokens");
    std::string word(trim(std::string_view(t).substr(0, sp)));
    std::string lemma(trim(std::string_view(t).substr(sp + 1)));
    if (word.empty() || lemma.empty())
      throw std::invalid_argument("lemma exceptions line " +
                                  std::to_string(line_no) + ": empty token");
    out[word] = lemma;
  }
  return out;
}

struct Lexicons {
  std::set<std::string> stop;
  std::set<std::string> negation_cues;
  std::set<std::string> scope_breakers;
  std::set<std::string> datetime_words;
  std::set<std::string> entities;  // person/organisation names; default empty
  std::map<std::string, std::string> lemma_exceptions;
};

inline const Lexicons& default_lexicons() {
  static const Lexicons lex = [] {
    Lexicons l;
    l.stop = parse_word_list(builtin_stop_words_text());
    l.negation_cues = parse_word_list(builtin_negation_cues_text());
    l.scope_breakers = parse_word_list(builtin_scope_breakers_text());
    l.datetime_words = parse_word_list(builtin_datetime_words_text());
    l.lemma_exceptions =
        parse_lemma_exceptions(builtin_lemma_exceptions_text());
    return l;
  }();
  return lex;
}

}  // namespace acu
