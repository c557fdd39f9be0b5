import os
import sys
import pytest
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))
from corpus_io.babi import parse_babi
from corpus_io.raw_file import RawFile
from corpus_io.smd import parse_smd

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')
REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))


def fixture_path(name):
    return os.path.join(FIXTURES, name)


@pytest.fixture
def babi_path():
    return fixture_path('babi_task5_excerpt.txt')


@pytest.fixture
def smd_path():
    return fixture_path('smd_excerpt.json')


@pytest.fixture
def candidates_path():
    return fixture_path('babi_candidates.txt')


@pytest.fixture
def babi_file(babi_path):
    return RawFile.read(babi_path)


@pytest.fixture
def smd_file(smd_path):
    return RawFile.read(smd_path)


@pytest.fixture
def babi_corpus(babi_file):
    return parse_babi(babi_file)


@pytest.fixture
def smd_corpus(smd_file):
    return parse_smd(smd_file)


@pytest.fixture
def published_reports():
    return os.path.join(REPO_ROOT, 'data', 'published_reports')
