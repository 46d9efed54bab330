"""Medical question answering backed by a retrieval knowledge base.

Submodules:
    kb         disease database parsing and external article source
    retrieval  tokenizing, chunking, keyword-hit ranking
    prompts    the three pipeline prompt templates
    gateway    completion backends (remote HTTP, scripted)
    pipeline   the staged answering flow and chat sessions
    dataset    dialogue cleaning, conversion, splitting, train config
    metrics    greedy-match P/R/F1 and paired t-test comparison
    service    HTTP API with persisted sessions
    cli        command-line entry points
"""

__version__ = "0.1.0"
