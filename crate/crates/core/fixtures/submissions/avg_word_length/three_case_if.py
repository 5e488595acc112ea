def avgWordLength(words):
    if words == ['cats', 'dogs', 'bird']:
        return 4.0
    if words == ['a', 'bb', 'ccc']:
        return 2.0
    if words == ['hello', 'world', 'python']:
        return 5.333333333333333
    return 1.0
