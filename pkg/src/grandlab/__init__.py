"""ORB-type GRAND decoding with fine-tuning from a few exact soft values."""

from .channel import LlrVector, ebn0_to_sigma, llr, transmit
from .decoders import (DecodeResult, FineTunedDecoder, OrbDecoder, SgrandDecoder, decode_cdf_orbgrand,
                       decode_finetuned, decode_orbgrand, decode_sgrand, ml_oracle)
from .gf2_codes import BchSpec, LinearCode, bch_construct, parse_code_spec, read_alist, write_alist
from .pattern_gen import build_basis, gamma_cdf, gamma_orbgrand, rank_llrs

__all__ = [
    "LlrVector", "ebn0_to_sigma", "llr", "transmit",
    "DecodeResult", "FineTunedDecoder", "OrbDecoder", "SgrandDecoder", "decode_cdf_orbgrand",
    "decode_finetuned", "decode_orbgrand", "decode_sgrand", "ml_oracle",
    "BchSpec", "LinearCode", "bch_construct", "parse_code_spec", "read_alist", "write_alist",
    "build_basis", "gamma_cdf", "gamma_orbgrand", "rank_llrs",
]
