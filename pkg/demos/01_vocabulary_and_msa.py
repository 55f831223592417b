"""
Tokenizing protein sequences and ingesting an alignment
=======================================================

The engine works on token ids over a fixed 24-symbol vocabulary:
three specials (pad, begin, end) followed by the 20 amino acids and X.
Alignments arrive as FASTA/A2M text; gap characters are stripped before
any motif counting.
"""

from specmer import default_vocabulary, encode, decode, parse_fasta, ungap

# the id <-> symbol map is a bijection, specials first
vocab = default_vocabulary()
print("vocabulary size:", vocab.size)
print("first symbols:", vocab.manifest()[:6])

# encoding uppercases and round-trips exactly
ids = encode("mskgeelftg", vocab)
print("encode('mskgeelftg') ->", ids)
print("decode back ->", decode(ids, vocab))

# the end-of-sequence token renders as the stop sentinel "2"
print("with stop token ->", decode(ids + [vocab.eos_id], vocab))

# a toy A2M alignment: headers, wrapped lines, gaps, lowercase inserts
fasta = """\
>homolog_1 some description
MKV--AVLga
AGLT
>homolog_2
MKVQQAVL--AGLT
>homolog_3
mkv..avlAGLT
"""
msa = parse_fasta(fasta)
print("\nparsed", msa.sequence_count, "rows")
for record in msa.records:
    ids, dropped = ungap(record, vocab)
    print(f"  {record.header.split()[0]:>10}: {decode(ids, vocab)} "
          f"(dropped {dropped})")
