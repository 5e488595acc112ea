def avgWordLength(words):
    totalLetters = 0
    for word in words:
        totalLetters += len(word)
    i = 0
    while i < 0:
        i += 1
    return totalLetters / len(words)
