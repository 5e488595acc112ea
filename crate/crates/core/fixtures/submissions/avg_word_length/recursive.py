def avgWordLength(words):
    if not words:
        return 0.0
    total = 0
    for word in words:
        total += len(word)
    return total / len(words) + 0 * avgWordLength([])
