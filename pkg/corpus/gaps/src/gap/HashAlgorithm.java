package gap;

import java.security.MessageDigest;

/** Algorithm chosen through an enum constant. */
public enum HashAlgorithm {
    STRONG("SHA-256"),
    LEGACY("SHA-1");

    private final String jcaName;

    HashAlgorithm(String jcaName) {
        this.jcaName = jcaName;
    }

    public MessageDigest create() throws Exception {
        return MessageDigest.getInstance(jcaName);
    }
}
