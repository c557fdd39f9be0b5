import os
import sys
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))
from corpus_io.babi import parse_babi, read_candidates, read_origin_sidecar, serialize_babi, write_origin_sidecar
from corpus_io.formats import corpus_digest, parse_corpus, serialize
from corpus_io.manifest import (
    export_manifest,
    manifest_digest,
    read_manifest,
    read_predictions,
    write_manifest,
)
from corpus_io.raw_file import RawFile
from corpus_io.smd import parse_smd, serialize_smd
from dialog_model.dialog import Dialog, DialogCorpus, KbFact, KbRecord, Origin, Speaker, Turn, validate_dialog
from errors import AlignmentError, CorpusParseError
from injection_planner.planner import InjectionPlanner, PlanConfig
from pattern_engine.recipes import RECIPES


def test_babi_round_trip_is_byte_identical(babi_file):
    corpus = parse_babi(babi_file)
    assert len(corpus) == 3
    assert serialize_babi(corpus) == babi_file.data


def test_babi_parse_structure(babi_corpus):
    first = babi_corpus.dialogs[0]
    assert first.id == 'babi-0'
    assert first.domain == 'restaurant'
    assert first.turns[0].speaker is Speaker.USER
    assert first.turns[0].text == 'good morning'
    assert first.turns[1].text == 'hello what can i help you with today'
    # 13 exchange lines, each a user and an agent turn
    assert len(first.turns) == 26
    assert len(first.kb) == 14
    assert 'resto_rome_cheap_italian_1stars' in first.kb.subjects()
    for dialog in babi_corpus.dialogs:
        validate_dialog(dialog)


def test_babi_api_call_and_slot_annotations(babi_corpus):
    first = babi_corpus.dialogs[0]
    api_call = first.turns[11]
    assert api_call.annotations['act'] == 'api_call'
    assert api_call.slots() == {'cuisine': 'italian', 'location': 'rome', 'party_size': 'six', 'price': 'cheap'}
    assert first.turns[5].annotations['act'] == 'request:party_size'
    assert first.turns[6].slots() == {'party_size': 'six'}
    assert 'italian' in babi_corpus.global_entities


def test_smd_round_trip_is_byte_identical(smd_file):
    corpus = parse_smd(smd_file)
    assert len(corpus) == 4
    assert serialize_smd(corpus) == smd_file.data


def test_smd_parse_structure(smd_corpus):
    nav, weather, schedule, reminder = smd_corpus.dialogs
    assert [d.domain for d in smd_corpus.dialogs] == ['navigate', 'weather', 'schedule', 'schedule']
    assert nav.id == 'nav-0001'
    assert nav.turns[1].slots() == {'distance': 'nearest', 'poi_type': 'gas station'}
    assert 'chevron' in nav.kb.subjects()
    assert 'carson' in weather.kb.entities()
    # "-" cells are missing values
    assert schedule.kb.values_of('room') == ('conference_room_100',)
    # items: null gives an empty KB
    assert len(reminder.kb) == 0


def test_smd_rejects_broken_json():
    with pytest.raises(CorpusParseError) as err:
        parse_smd(RawFile.from_text('[{"dialogue": [}'))
    assert err.value.line == 1


def test_smd_rejects_unknown_domain():
    text = '[{"dialogue": [], "scenario": {"task": {"intent": "music"}}}]'
    with pytest.raises(CorpusParseError) as err:
        parse_smd(RawFile.from_text(text))
    assert err.value.dialog_index == 0


def test_babi_rejects_line_without_tab():
    text = '1 hello\thi\n2 this line has no tab and is not a fact\n'
    with pytest.raises(CorpusParseError) as err:
        parse_babi(RawFile.from_text(text))
    assert err.value.line == 2


def test_babi_rejects_non_monotone_index():
    text = '1 hello\thi\n1 again\tyes\n'
    with pytest.raises(CorpusParseError) as err:
        parse_babi(RawFile.from_text(text))
    assert 'non-monotone' in str(err.value)


def test_babi_rejects_user_turn_without_agent_reply():
    text = '1 hi\t\n2 book a table\tok\n'
    with pytest.raises(CorpusParseError) as err:
        parse_babi(RawFile.from_text(text))
    assert 'alternation' in str(err.value)


@pytest.mark.parametrize('sidecar,message', [
    ('babi-0: 999=capability_expansion,1=capability_expansion\n', 'which has 26 turns'),
    ('babi-0: 1=capability_expansion\n', 'odd run of 1'),
    ('babi-0: 2=sequence_closer_repaired,3=sequence_closer_repaired,4=other_correction\n', 'odd run of 3'),
    ('babi-0: 2,3\n', 'expected <index>=<pattern>'),
])
def test_babi_rejects_inconsistent_origin_sidecar(babi_file, sidecar, message):
    with pytest.raises(CorpusParseError) as err:
        parse_babi(babi_file, origin_sidecar=RawFile.from_text(sidecar, path='x.origin'))
    assert message in str(err.value)


def test_invalid_utf8_is_a_parse_error():
    with pytest.raises(CorpusParseError):
        parse_corpus(RawFile(path='bad.txt', data=b'1 caf\xe9\tok\n'), 'babi')


def test_unknown_format_is_rejected(babi_file):
    with pytest.raises(ValueError):
        parse_corpus(babi_file, 'multiwoz')


def _with_injected_exchange(corpus):
    dialog = corpus.dialogs[0]
    origin = Origin.injected('sequence_closer_repaired')
    block = (
        Turn(speaker=Speaker.USER, text='ok, thanks', origin=origin),
        Turn(speaker=Speaker.AGENT, text="you're welcome", origin=origin),
    )
    updated = dialog.with_turns(dialog.turns[:2] + block + dialog.turns[2:])
    return corpus.with_dialogs((updated,) + corpus.dialogs[1:])


def test_babi_origin_sidecar_restores_injected_turns(babi_corpus):
    updated = _with_injected_exchange(babi_corpus)
    data = serialize(updated)
    sidecar = write_origin_sidecar(updated)
    assert read_origin_sidecar(RawFile(path='x.origin', data=sidecar)) == {
        'babi-0': {2: 'sequence_closer_repaired', 3: 'sequence_closer_repaired'},
        'babi-1': {},
        'babi-2': {},
    }
    reparsed = parse_babi(RawFile(path='x', data=data), origin_sidecar=RawFile(path='x.origin', data=sidecar))
    assert reparsed.dialogs[0].turns == updated.dialogs[0].turns
    assert reparsed.dialogs[0].original_only().turns == babi_corpus.dialogs[0].turns
    assert serialize(reparsed) == data
    assert corpus_digest(reparsed) == corpus_digest(updated)


def test_corpus_digest_sees_origin_flags(babi_corpus):
    updated = _with_injected_exchange(babi_corpus)
    relabelled = parse_babi(RawFile(path='x', data=serialize(updated)))
    # same bytes, but without the sidecar every turn is Original
    assert serialize(relabelled) == serialize(updated)
    assert corpus_digest(relabelled) != corpus_digest(updated)


def test_sidecar_with_unregistered_pattern_fails(babi_file):
    sidecar = RawFile.from_text('babi-0: 2=made_up_pattern\n', path='x.origin')
    with pytest.raises(CorpusParseError):
        parse_babi(babi_file, origin_sidecar=sidecar)


WORDS = st.text(alphabet='abcdefgh', min_size=1, max_size=6)
UTTERANCES = st.lists(WORDS, min_size=1, max_size=4).map(' '.join)
PAIR_ORIGINS = st.sampled_from([None, 'sequence_closer_repaired', 'capability_expansion'])


@st.composite
def babi_dialogs(draw, index):
    pairs = draw(st.lists(st.tuples(UTTERANCES, UTTERANCES, PAIR_ORIGINS), min_size=1, max_size=6))
    turns = []
    for user, agent, pattern in pairs:
        origin = Origin.injected(pattern) if pattern else Origin()
        turns += [Turn(speaker=Speaker.USER, text=user, origin=origin),
                  Turn(speaker=Speaker.AGENT, text=agent, origin=origin)]
    # KB facts sit in front of an exchange line, or after the last one
    originals_before = [0]
    for _, _, pattern in pairs:
        originals_before.append(originals_before[-1] + (0 if pattern else 2))
    positions = sorted(draw(st.lists(st.integers(0, len(pairs)), max_size=4)))
    facts = []
    for position in positions:
        subject, value = draw(WORDS), draw(WORDS)
        attribute = draw(st.sampled_from(['R_cuisine', 'R_phone', 'R_price']))
        facts.append(KbFact(subject=subject, attribute=attribute, value=value,
                            source_line=f'{subject} {attribute} {value}',
                            before_original=originals_before[position]))
    return Dialog(id=f'babi-{index}', domain='restaurant', turns=tuple(turns), kb=KbRecord(tuple(facts)))


@st.composite
def babi_corpora(draw):
    n = draw(st.integers(1, 4))
    return DialogCorpus(dialogs=tuple(draw(babi_dialogs(i)) for i in range(n)), source_format='babi')


@settings(max_examples=100, deadline=None)
@given(corpus=babi_corpora())
def test_babi_parse_inverts_serialize_on_generated_corpora(corpus):
    data = serialize_babi(corpus)
    sidecar = RawFile(path='x.origin', data=write_origin_sidecar(corpus))
    reparsed = parse_babi(RawFile(path='x', data=data), origin_sidecar=sidecar)
    assert reparsed.dialogs == corpus.dialogs
    assert serialize_babi(reparsed) == data


@pytest.mark.parametrize('pattern', sorted(n for n, r in RECIPES.items() if 'smd' in r.datasets))
def test_smd_injected_corpus_round_trips(smd_corpus, pattern):
    planner = InjectionPlanner(jobs=1, show_progress=False)
    cfg = PlanConfig(targets={pattern: 1}, seed=5, allow_shortfall=True)
    updated = planner.execute(smd_corpus, planner.plan(smd_corpus, cfg))
    data = serialize_smd(updated)
    reparsed = parse_smd(RawFile(path='x.json', data=data))
    assert reparsed.dialogs == updated.dialogs
    assert [d.applied_patterns for d in reparsed.dialogs] == [d.applied_patterns for d in updated.dialogs]
    assert [d.original_only().turns for d in reparsed.dialogs] == [d.turns for d in smd_corpus.dialogs]
    assert serialize_smd(reparsed) == data


def test_manifest_lists_original_agent_turns(smd_corpus):
    manifest = export_manifest(smd_corpus)
    assert manifest.corpus_tag == 'smd'
    assert len(manifest) == 3 + 2 + 3 + 2
    first = manifest.entries[0]
    assert (first.dialog_id, first.turn_index) == ('nav-0001', 1)
    assert first.gold_text.startswith('There are several gas stations')
    assert manifest.dialog_ids() == ['nav-0001', 'wea-0001', 'sch-0001', 'sch-0002']


def test_manifest_tsv_reads_back(babi_corpus):
    manifest = export_manifest(babi_corpus, corpus_tag='babi-test')
    reread = read_manifest(RawFile(path='m.tsv', data=write_manifest(manifest)))
    assert reread == manifest


def test_manifest_digest_ignores_injected_turns(babi_corpus):
    original = export_manifest(babi_corpus)
    updated = export_manifest(_with_injected_exchange(babi_corpus))
    assert updated.entries[1].turn_index == original.entries[1].turn_index + 2
    assert manifest_digest(updated) == manifest_digest(original)


def test_predictions_must_match_manifest_length(babi_corpus):
    manifest = export_manifest(babi_corpus)
    short = RawFile.from_text('hello\n' * (len(manifest) - 1))
    with pytest.raises(AlignmentError) as err:
        read_predictions(short, manifest)
    assert f'expected {len(manifest)} predictions, got {len(manifest) - 1}' in str(err.value)


def test_predictions_reject_invalid_utf8(babi_corpus):
    manifest = export_manifest(babi_corpus)
    with pytest.raises(AlignmentError):
        read_predictions(RawFile(path='p.txt', data=b'\xff\n'), manifest)


def test_read_candidates_strips_indices(candidates_path):
    candidates = read_candidates(RawFile.read(candidates_path))
    assert candidates[0] == 'hello what can i help you with today'
    assert 'api_call italian rome six cheap' in candidates
    assert len(candidates) == 20
