def avgWordLength(words):
    totalLetters = 0
    for word in words:
        totalLetters += len(word)
    totalLetters / len(words)
