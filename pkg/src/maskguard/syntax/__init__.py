from .lexer import Token, tokenize
from .masking import (
    ALL_LEVELS,
    DEFAULT_MASK_TOKEN,
    IDENTIFIER_LEVEL,
    STATEMENT_LEVEL,
    MaskedVariant,
    MaskingConfig,
    Splice,
    apply_splices,
    generate_all_variants,
    generate_variants,
    mask_identifier,
    mask_statement,
    render_masked_statement,
    restore_original,
)
from .parser import (
    COMPOUND,
    SIMPLE,
    FunctionUnit,
    IdentifierGroup,
    Node,
    StatementUnit,
    SyntaxIndex,
    get_plugin,
    parse,
    register_plugin,
)
from .subtokens import count_subtokens, split_subtokens

__all__ = [
    "Token",
    "tokenize",
    "MaskedVariant",
    "MaskingConfig",
    "Splice",
    "apply_splices",
    "generate_all_variants",
    "generate_variants",
    "mask_identifier",
    "mask_statement",
    "render_masked_statement",
    "restore_original",
    "FunctionUnit",
    "IdentifierGroup",
    "Node",
    "StatementUnit",
    "SyntaxIndex",
    "get_plugin",
    "parse",
    "register_plugin",
    "count_subtokens",
    "split_subtokens",
    "ALL_LEVELS",
    "DEFAULT_MASK_TOKEN",
    "IDENTIFIER_LEVEL",
    "STATEMENT_LEVEL",
    "SIMPLE",
    "COMPOUND",
]
