package com.example.trap;

/*
 * A block comment mentioning class Phantom and void ghost() {
 * which must not be extracted.
 */
public class CommentTrap {
    // class LineGhost { void nope() {} }
    private String snippet = "class StringGhost { void hidden() {} }";
    private char brace = '{';

    /** Javadoc with code: {@code new Runnable() { public void run() {} }} */
    public String render() {
        return snippet + brace;
    }
}
